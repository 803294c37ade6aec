"""
2-D projection of representations for overlap plots
"""
from pathlib import Path
from typing import List

import numpy as np
import pandas as pd
from sklearn.decomposition import PCA
from sklearn.manifold import TSNE

from app.schemas.evaluation import ProjectionResult, ProjectionRow

MIN_VECTORS = 3
DEGENERATE_RTOL = 1e-9  # spread relative to the largest magnitude


def export_projection(
    vectors: np.ndarray,
    domains: np.ndarray,
    speakers: List[str],
    method: str = "pca",
    seed: int = 0
) -> ProjectionResult:
    """
    Проекция на 2 главные компоненты центрированной матрицы

    method="tsne" доступен как опция, без гарантий воспроизводимости между версиями.
    """
    vectors = np.asarray(vectors, dtype=np.float64)
    if vectors.ndim != 2 or len(vectors) < MIN_VECTORS:
        raise ValueError(f"Projection needs at least {MIN_VECTORS} vectors, got {len(vectors)}")
    if len(domains) != len(vectors) or len(speakers) != len(vectors):
        raise ValueError("domains and speakers must match the number of vectors")

    centered = vectors - vectors.mean(axis=0)
    scale = max(float(np.abs(vectors).max()), np.finfo(np.float64).tiny)
    if float(np.abs(centered).max()) <= DEGENERATE_RTOL * scale:
        raise ValueError("Degenerate (rank-0) representation set")

    explained = None
    if method == "pca":
        n_components = min(2, vectors.shape[1])
        pca = PCA(n_components=n_components, svd_solver="full")
        points = pca.fit_transform(vectors)
        explained = [float(v) for v in pca.explained_variance_ratio_]
        if n_components == 1:
            points = np.hstack([points, np.zeros((len(points), 1))])
    elif method == "tsne":
        perplexity = min(30.0, (len(vectors) - 1) / 3.0)
        points = TSNE(n_components=2, perplexity=perplexity, random_state=seed, init="pca").fit_transform(vectors)
    else:
        raise ValueError(f"Unknown projection method '{method}'")

    rows = [
        ProjectionRow(x=float(x), y=float(y), domain=int(d), speaker=str(s))
        for (x, y), d, s in zip(points, domains, speakers)
    ]
    return ProjectionResult(rows=rows, method=method, explained_variance_ratio=explained)


def write_projection_csv(result: ProjectionResult, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame([row.model_dump() for row in result.rows], columns=["x", "y", "domain", "speaker"])
    frame.to_csv(path, index=False, lineterminator="\n")
    return path
