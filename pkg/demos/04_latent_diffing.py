#!/usr/bin/env python3
"""Diff the latent codes of neighboring reference points and trace the
differing bits back to the access points responsible.

Also exports the per-RP latent matrix as a binary-pixel PGM bitmap, one row
per reference point, for visual inspection.
"""

import tempfile
from pathlib import Path

import lognet as ln
from lognet.evaluate import latent_diff, majority_code
from lognet.gates import LatentCode


def main():
    ds, _ = ln.synth_dataset(ln.SynthSpec(num_rps=10, num_aps=20, fingerprints_per_rp=6, seed=3))
    encoder = ln.LogicEncoderConfig(ln.GateType.NOR, threshold=0.5, hidden_layers=1)

    codes_by_rp: dict[int, list[LatentCode]] = {}
    for fp in ds:
        norm = ln.normalize_values(fp.rss)
        bits = ln.binarize(ln.Fingerprint(fp.rp_id, fp.device_id, fp.ci, norm))
        codes_by_rp.setdefault(fp.rp_id, []).append(ln.encode(bits, encoder))

    majorities = {rp: majority_code(codes) for rp, codes in codes_by_rp.items()}

    print("latent matrix (rows = RPs):")
    for rp in sorted(majorities):
        print(f"  rp {rp:>2}: {''.join(str(b) for b in majorities[rp].bits)}")

    for rp_a, rp_b in ((4, 5), (8, 9)):
        diff = latent_diff(codes_by_rp[rp_a], codes_by_rp[rp_b], rp_a, rp_b)
        print()
        print(diff.format_table())

    out = Path(tempfile.mkdtemp(prefix="lognet-demo-")) / "latent_bitmap.pgm"
    ln.export_latent_bitmap(majorities, out)
    print(f"\nbitmap written to {out}")


if __name__ == "__main__":
    main()
