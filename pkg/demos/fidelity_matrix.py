#!/usr/bin/env python3
"""Input-output fidelity matrix under calibrated polarization noise.

Calibrates the isotropic polarization noise so the expected classification
fidelity is 0.889, samples a million events per input, and prints the 4x4
matrix of classification fractions with their counting errors.  The mixing
law predicts p + (1-p)/4 on the diagonal and (1-p)/4 spread uniformly over
the three wrong labels.

Run:  python demos/fidelity_matrix.py [--target 0.889] [--events 1000000]
"""

import argparse

import numpy as np

import hyperbell as hb


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--target", type=float, default=0.889,
                        help="average fidelity to calibrate the noise to")
    parser.add_argument("--events", type=int, default=1_000_000,
                        help="expected sampled events per input state")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    p = hb.calibrate_pol_noise(args.target)
    print(f"calibrated werner parameter: p = {p:.6g} "
          f"(law: F = p + (1-p)/4 = {p + (1 - p) / 4:.6g})")

    config = hb.AnalyzerConfig(
        pol_werner_p=p,
        count_rate_hz=1000.0,
        acquisition_s=args.events / 1000.0,
        seed=args.seed,
    )
    matrix = hb.run_full_analysis(config)

    header = "input \\ output " + "".join(f"{lab.value:>12}" for lab in hb.LABELS)
    print("\n" + header)
    for label in hb.LABELS:
        row = matrix[label]
        cells = "".join(f"{row[out].value:>12.4f}" for out in hb.LABELS)
        print(f"{label.value:<15}{cells}")
    print("\ncounting errors (one sigma):")
    for label in hb.LABELS:
        row = matrix[label]
        cells = "".join(f"{row[out].std_error:>12.5f}" for out in hb.LABELS)
        print(f"{label.value:<15}{cells}")

    diag = [matrix[lab][lab].value for lab in hb.LABELS]
    print(f"\ndiagonal average: {np.mean(diag):.4f} (calibration target {args.target})")


if __name__ == "__main__":
    main()
