"""
Toy corpus initialization script
Writes a synthetic two-speaker corpus with two noise types and builds train/test manifests
"""
import sys
from collections import Counter
from pathlib import Path

from app.services import manifest_service, synthetic_service


def build_split(clean_dir: Path, noise_dir: Path, out_dir: Path, split: str, seed: int) -> Path:
    """Build one manifest split; noise is cut from that split's portion of each clip"""
    entries = manifest_service.build_manifest(
        clean_dir,
        noise_dir,
        out_dir / "noisy",
        seed=seed,
        split=split,
        every_noise_type=True
    )
    path = manifest_service.write_manifest(entries, out_dir / f"manifest_{split}.jsonl")
    print(f"Wrote {len(entries)} entries to {path}")
    return path


def verify_manifest(path: Path):
    """Print per-domain and per-noise-type counts"""
    entries = manifest_service.read_manifest(path)
    domains = Counter("noisy" if e.is_noisy else "clean" for e in entries)
    noise_types = Counter(e.noise_type for e in entries if e.is_noisy)

    print(f"\nVerification ({path.name}):")
    for domain, count in sorted(domains.items()):
        print(f"  {domain}: {count}")
    print("  Noise types:")
    for noise_type, count in sorted(noise_types.items()):
        print(f"    {noise_type}: {count}")


def main():
    """Main execution"""
    out_dir = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("toy_corpus")
    print("Toy Corpus Initialization")
    print("=" * 50)

    clean_dir, noise_dir = synthetic_service.write_toy_corpus(out_dir)

    for split, seed in (("train", 0), ("test", 1)):
        verify_manifest(build_split(clean_dir, noise_dir, out_dir, split, seed))

    print("\n" + "=" * 50)
    print("[OK] Toy corpus created successfully!")
    print(f"Corpus directory: {out_dir}")


if __name__ == "__main__":
    main()
