import argparse
import logging

from app.commands import emit_summary, require_file
from app.errors import UsageError
from app.services import conversion_service, manifest_service, probe_service, projection_service
from app.services.dataset_service import FeatureStore

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("project", help="2-D projection of utterance-level representations")
    parser.add_argument("--checkpoint", required=True)
    parser.add_argument("--manifest", required=True)
    parser.add_argument("--out-csv", required=True)
    parser.add_argument("--kind", choices=["speaker", "content"], default="speaker")
    parser.add_argument("--method", choices=["pca", "tsne"], default="pca")
    parser.add_argument("--seed", type=int, default=0)
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> None:
    entries = manifest_service.read_manifest(require_file(args.manifest, "--manifest"))
    model = conversion_service.load_model(require_file(args.checkpoint, "--checkpoint"))

    reps = probe_service.collect_representations(model, FeatureStore(entries), entries, args.kind, pooled=True)
    if len(reps.vectors) < projection_service.MIN_VECTORS:
        raise UsageError(
            f"Projection needs at least {projection_service.MIN_VECTORS} utterances, manifest has {len(reps.vectors)}"
        )

    result = projection_service.export_projection(reps.vectors, reps.domains, reps.speakers, args.method, args.seed)
    projection_service.write_projection_csv(result, args.out_csv)
    emit_summary(
        command="project",
        out_csv=args.out_csv,
        rows=len(result.rows),
        method=result.method,
        explained_variance_ratio=result.explained_variance_ratio
    )
