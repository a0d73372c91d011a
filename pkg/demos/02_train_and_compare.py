#!/usr/bin/env python3
"""Train the six gate variants and the dense baseline on one synthetic
building and compare error, parameter count and latency."""

import tempfile
from pathlib import Path

import lognet as ln


def main():
    out_root = Path(tempfile.mkdtemp(prefix="lognet-demo-"))
    # Width 3 keeps the strong windows misaligned with the gate pairing, so
    # the parity gates (xor/xnor) see usable structure too.
    synth = ln.SynthSpec(num_rps=12, num_aps=24, fingerprints_per_rp=6, seed=11, strong_width=3)
    noise = ln.NoiseSpec(ln.NoiseMode.ED, -4.0, 1.0, seed=5)

    configs = []
    for gate in ln.GateType:
        configs.append(
            ln.ExperimentConfig(
                out_dir=str(out_root / f"lognet-{gate.value}"),
                synth=synth,
                model_family="lognet",
                gate=gate,
                train=ln.TrainConfig(epochs=150, seed=0),
                noise=noise,
            )
        )
    configs.append(
        ln.ExperimentConfig(
            out_dir=str(out_root / "dnn-1h"),
            synth=synth,
            model_family="dnn",
            train=ln.TrainConfig(epochs=500, seed=0),
            noise=noise,
        )
    )

    table = ln.compare_models(configs)
    print(table.format_text())
    table.to_csv(out_root / "comparison.csv")
    print(f"\nper-run artifacts and comparison.csv under {out_root}")


if __name__ == "__main__":
    main()
