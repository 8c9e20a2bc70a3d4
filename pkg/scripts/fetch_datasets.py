"""Download benchmark CSVs into data/ and pin their SHA-256.

The datasets are not redistributed with this package.  Pass the source URL
for each file you have access to:

    python scripts/fetch_datasets.py breast-cancer-unsupervised-ad.csv URL

The first successful download records the checksum in data/checksums.json;
later downloads of the same file name must match it.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import sys
import urllib.request
from pathlib import Path

DATA = Path(__file__).resolve().parent.parent / "data"
LOCK = DATA / "checksums.json"


def sha256(blob: bytes) -> str:
    return hashlib.sha256(blob).hexdigest()


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("name", help="file name to store under data/")
    ap.add_argument("url")
    args = ap.parse_args(argv)

    DATA.mkdir(exist_ok=True)
    pinned = json.loads(LOCK.read_text()) if LOCK.exists() else {}
    with urllib.request.urlopen(args.url) as resp:
        blob = resp.read()
    digest = sha256(blob)
    if args.name in pinned and pinned[args.name] != digest:
        print(f"checksum mismatch for {args.name}: expected {pinned[args.name]}, got {digest}", file=sys.stderr)
        return 1
    (DATA / args.name).write_bytes(blob)
    pinned[args.name] = digest
    LOCK.write_text(json.dumps(pinned, indent=2, sort_keys=True) + "\n")
    print(f"{args.name}: {len(blob)} bytes, sha256 {digest}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
