"""Command-line front end.

Subcommands::

    hyperbell analyze   --state phi+ [--config cfg.json] [--shots N]
                        [--out out.csv] [--format csv|json]
    hyperbell sweep     --from-um A --to-um B --steps N [--state psi+]
                        [--config cfg.json] [--out out.csv]
    hyperbell decompose --state psi-
    hyperbell verify

Configs are JSON documents with the keys ``delay_um``, ``lambda0_nm``,
``fwhm_nm``, ``filter_shape``, ``pol_werner_p``, ``bs_imbalance``,
``detector_efficiency``, ``count_rate_hz``, ``acquisition_s`` and ``seed``;
every key is optional and unknown keys are rejected.  Outputs are UTF-8 CSV
(with a ``.manifest.json`` sidecar) or JSON with the manifest embedded; file
writes are atomic (temp file plus rename).  Exit codes: 0 success, 1 failed
verification, 2 configuration error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
import tempfile
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .apparatus import (
    ALL_PATTERNS,
    LABELS,
    BellLabel,
    analyzer_probabilities,
    decision_table,
    prepare_hyperentangled,
    single_photon_decomposition,
)
from .elements import FilterShape, SpectralFilter, visibility
from .experiment import (
    STREAM_SINGLE,
    AnalyzerConfig,
    derive_stream,
    fidelity_from_counts,
    simulate_counts,
    sweep_delay,
)
from .verify import run_all_checks

__all__ = [
    "ConfigError",
    "MalformedDocumentError",
    "UnknownKeyError",
    "OutOfRangeValueError",
    "parse_config",
    "main",
]


class ConfigError(ValueError):
    """Base class for configuration problems; ``code`` is machine-readable."""

    code = "ConfigError"


class MalformedDocumentError(ConfigError):
    code = "MalformedDocument"

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class UnknownKeyError(ConfigError):
    code = "UnknownKey"

    def __init__(self, key: str):
        super().__init__(f"unknown configuration key {key!r}")
        self.key = key


class OutOfRangeValueError(ConfigError):
    code = "OutOfRangeValue"

    def __init__(self, key: str, value, admissible: str):
        super().__init__(f"value {value!r} for key {key!r} is outside {admissible}")
        self.key = key


# key -> (kind, admissible-range description, validator)
_CONFIG_KEYS = {
    "delay_um": ("number", "[0, inf)", lambda v: v >= 0),
    "lambda0_nm": ("number", "(0, inf)", lambda v: v > 0),
    "fwhm_nm": ("number", "(0, inf)", lambda v: v > 0),
    "filter_shape": ("string", "{gaussian, rectangular}",
                     lambda v: v in ("gaussian", "rectangular")),
    "pol_werner_p": ("number", "[0, 1]", lambda v: 0.0 <= v <= 1.0),
    "bs_imbalance": ("number", "[-0.5, 0.5]", lambda v: -0.5 <= v <= 0.5),
    "detector_efficiency": ("number", "(0, 1]", lambda v: 0.0 < v <= 1.0),
    "count_rate_hz": ("number", "(0, inf)", lambda v: v > 0),
    "acquisition_s": ("number", "(0, inf)", lambda v: v > 0),
    "seed": ("integer", "[0, 2^64)", lambda v: 0 <= v < 2**64),
}


def parse_config(text: str) -> AnalyzerConfig:
    """Parse a JSON configuration document into an :class:`AnalyzerConfig`.

    All keys are optional; ``"{}"`` yields the documented defaults.  Unknown
    keys and out-of-range values are errors, not warnings.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedDocumentError(exc.msg, exc.lineno, exc.colno) from exc
    if not isinstance(doc, dict):
        raise MalformedDocumentError("top-level value must be an object", 1, 1)
    for key, value in doc.items():
        if key not in _CONFIG_KEYS:
            raise UnknownKeyError(key)
        kind, admissible, validator = _CONFIG_KEYS[key]
        if isinstance(value, bool):
            raise OutOfRangeValueError(key, value, admissible)
        if kind == "number" and not isinstance(value, (int, float)):
            raise OutOfRangeValueError(key, value, f"a number in {admissible}")
        if kind == "integer" and not isinstance(value, int):
            raise OutOfRangeValueError(key, value, f"an integer in {admissible}")
        if kind == "string" and not isinstance(value, str):
            raise OutOfRangeValueError(key, value, admissible)
        if not validator(value):
            raise OutOfRangeValueError(key, value, admissible)
    if "fwhm_nm" in doc or "lambda0_nm" in doc:
        center = doc.get("lambda0_nm", 728.0)
        fwhm = doc.get("fwhm_nm", 6.0)
        if not fwhm < center:
            raise OutOfRangeValueError("fwhm_nm", fwhm, f"(0, lambda0_nm={center})")
    filt = SpectralFilter(
        center_nm=doc.get("lambda0_nm", 728.0),
        fwhm_nm=doc.get("fwhm_nm", 6.0),
        shape=FilterShape(doc.get("filter_shape", "gaussian")),
    )
    return AnalyzerConfig(
        delay_um=doc.get("delay_um", 0.0),
        filter=filt,
        pol_werner_p=doc.get("pol_werner_p", 1.0),
        bs_imbalance=doc.get("bs_imbalance", 0.0),
        detector_efficiency=doc.get("detector_efficiency", 1.0),
        count_rate_hz=doc.get("count_rate_hz", 1000.0),
        acquisition_s=doc.get("acquisition_s", 10.0),
        seed=doc.get("seed", 0),
    )


def _config_as_dict(config: AnalyzerConfig) -> dict:
    return {
        "delay_um": _num(config.delay_um),
        "lambda0_nm": _num(config.filter.center_nm),
        "fwhm_nm": _num(config.filter.fwhm_nm),
        "filter_shape": config.filter.shape.value,
        "pol_werner_p": _num(config.pol_werner_p),
        "bs_imbalance": _num(config.bs_imbalance),
        "detector_efficiency": _num(config.detector_efficiency),
        "count_rate_hz": _num(config.count_rate_hz),
        "acquisition_s": _num(config.acquisition_s),
        "seed": int(config.seed),
    }


@dataclass(frozen=True)
class RunManifest:
    """Reproduction record written next to (or inside) every output."""

    command: str
    config: dict
    seed: int
    arguments: dict
    version: str
    timestamp_utc: str

    @classmethod
    def create(cls, command: str, config: AnalyzerConfig, arguments: dict) -> "RunManifest":
        return cls(
            command=command,
            config=_config_as_dict(config),
            seed=int(config.seed),
            arguments=arguments,
            version=__version__,
            timestamp_utc=datetime.now(timezone.utc).isoformat(timespec="seconds"),
        )

    def as_dict(self) -> dict:
        return {
            "artifact": "hyperbell",
            "version": self.version,
            "command": self.command,
            "timestamp_utc": self.timestamp_utc,
            "seed": self.seed,
            "arguments": self.arguments,
            "config": self.config,
        }


def _fmt(x: float) -> str:
    """12-significant-digit decimal text; never a negative zero."""
    if x == 0:
        x = 0.0
    return f"{x:.12g}"


def _num(x: float) -> float:
    """Float rounded to 12 significant digits for JSON serialization."""
    if x == 0:
        return 0.0
    return float(f"{x:.12g}")


def _write_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".hyperbell-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(out_path: Optional[str], text: str, manifest: RunManifest, embed: bool) -> None:
    """Write text to a file (with manifest sidecar unless embedded) or stdout."""
    if out_path is None:
        sys.stdout.write(text)
        return
    _write_atomic(out_path, text)
    if not embed:
        sidecar = out_path + ".manifest.json"
        _write_atomic(sidecar, json.dumps(manifest.as_dict(), indent=2) + "\n")


def _error(code: str, message: str) -> None:
    print(f"error-code: {code}", file=sys.stderr)
    print(message, file=sys.stderr)


def _load_config(path: Optional[str]) -> AnalyzerConfig:
    if path is None:
        return AnalyzerConfig()
    try:
        with open(path, "r", encoding="utf-8") as handle:
            text = handle.read()
    except OSError as exc:
        raise _IOFailure(f"cannot read config file {path!r}: {exc}") from exc
    return parse_config(text)


class _IOFailure(RuntimeError):
    pass


def _parse_state(value: str) -> BellLabel:
    try:
        return BellLabel(value)
    except ValueError:
        valid = ", ".join(lab.value for lab in LABELS)
        raise ConfigError(f"unknown state {value!r}; expected one of: {valid}")


# ---------------------------------------------------------------------------
# analyze


def _analyze_rows(config: AnalyzerConfig, state: BellLabel):
    probs = analyzer_probabilities(prepare_hyperentangled(state).to_density(), config)
    counts = simulate_counts(
        probs,
        config.count_rate_hz,
        config.acquisition_s,
        derive_stream(config.seed, STREAM_SINGLE, 0),
    )
    rows = []
    for pattern in ALL_PATTERNS:
        rows.append(
            {
                "pattern": str(pattern),
                "port_pol": pattern.port_pol_form(),
                "probability": probs.value(pattern),
                "count": int(counts.value(pattern)),
            }
        )
    fidelities = [
        {
            "label": out.value,
            "value": est.value,
            "std_error": est.std_error,
            "n_events": est.n_events,
        }
        for out in LABELS
        for est in [fidelity_from_counts(counts, out)]
    ]
    return rows, fidelities


def _analyze_csv(rows, fidelities) -> str:
    lines = ["pattern,port_pol,probability,count"]
    for row in rows:
        lines.append(
            f"{row['pattern']},\"{row['port_pol']}\","
            f"{_fmt(row['probability'])},{row['count']}"
        )
    lines.append("")
    lines.append("label,fidelity,std_error,n_events")
    for fid in fidelities:
        lines.append(
            f"{fid['label']},{_fmt(fid['value'])},{_fmt(fid['std_error'])},{fid['n_events']}"
        )
    return "\n".join(lines) + "\n"


def _analyze_json(rows, fidelities, manifest: RunManifest) -> str:
    doc = {
        "manifest": manifest.as_dict(),
        "bins": [
            {
                "pattern": row["pattern"],
                "port_pol": row["port_pol"],
                "probability": _num(row["probability"]),
                "count": row["count"],
            }
            for row in rows
        ],
        "fidelities": [
            {
                "label": fid["label"],
                "value": _num(fid["value"]),
                "std_error": _num(fid["std_error"]),
                "n_events": fid["n_events"],
            }
            for fid in fidelities
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


def cmd_analyze(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    state = _parse_state(args.state)
    if args.shots is not None:
        if args.shots < 1:
            raise ConfigError("--shots must be at least 1 when sampling is requested")
        config = dataclasses.replace(config, acquisition_s=args.shots / config.count_rate_hz)
    rows, fidelities = _analyze_rows(config, state)
    manifest = RunManifest.create(
        "analyze", config, {"state": state.value, "shots": args.shots, "format": args.format}
    )
    if args.format == "json":
        _emit(args.out, _analyze_json(rows, fidelities, manifest), manifest, embed=True)
    else:
        _emit(args.out, _analyze_csv(rows, fidelities), manifest, embed=False)
    return 0


# ---------------------------------------------------------------------------
# sweep

_SWEEP_HEADER = (
    "delta_x_um,visibility,"
    "f_phi_plus,f_phi_minus,f_psi_plus,f_psi_minus,"
    "sigma_phi_plus,sigma_phi_minus,sigma_psi_plus,sigma_psi_minus,"
    "analytic_f_plus,analytic_f_minus"
)


def cmd_sweep(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    state = _parse_state(args.state)
    if args.steps < 2:
        raise ConfigError("--steps must be at least 2")
    if not args.from_um < args.to_um:
        raise ConfigError("--from-um must be strictly below --to-um")
    if args.from_um < 0:
        raise ConfigError("--from-um must be nonnegative")
    delays = np.linspace(args.from_um, args.to_um, args.steps)
    result = sweep_delay(config, delays, input_label=state)
    lines = [_SWEEP_HEADER]
    for point in result.points:
        cells = [_fmt(point.delay_um), _fmt(point.visibility)]
        cells += [_fmt(point.fidelities[lab].value) for lab in LABELS]
        cells += [_fmt(point.fidelities[lab].std_error) for lab in LABELS]
        cells += [_fmt(point.analytic_plus), _fmt(point.analytic_minus)]
        lines.append(",".join(cells))
    text = "\n".join(lines) + "\n"
    manifest = RunManifest.create(
        "sweep",
        config,
        {
            "state": state.value,
            "from_um": _num(args.from_um),
            "to_um": _num(args.to_um),
            "steps": args.steps,
        },
    )
    _emit(args.out, text, manifest, embed=False)
    return 0


# ---------------------------------------------------------------------------
# decompose


def _coeff_text(value: complex) -> str:
    """Render a decomposition coefficient, snapping exact halves to +/-0.5."""
    if abs(value.imag) > 1e-12:
        return f"{_fmt(value.real)}{value.imag:+.12g}j"
    real = value.real
    for target, text in ((0.5, "+0.5"), (-0.5, "-0.5"), (0.0, "0")):
        if abs(real - target) < 1e-12:
            return text
    return _fmt(real)


def cmd_decompose(args: argparse.Namespace) -> int:
    state = _parse_state(args.state)
    coeffs = single_photon_decomposition(prepare_hyperentangled(state))
    print(f"input state: {state.value}")
    print("pattern  port_pol   coefficient")
    for pattern in ALL_PATTERNS:
        a, b = pattern.single_photon_pair
        value = complex(coeffs.coeffs[pattern.index // 4, pattern.index % 4])
        print(f"{a + b:<6}  {pattern.port_pol_form():<10} {_coeff_text(value)}")
    return 0


# ---------------------------------------------------------------------------
# verify


def cmd_verify(args: argparse.Namespace) -> int:
    results = run_all_checks(corrupt_decision_table=args.corrupt_decision_table)
    failed = 0
    for result in results:
        status = "PASS" if result.passed else "FAIL"
        detail = f" ({result.detail})" if result.detail else ""
        print(f"{status} {result.name}{detail}")
        failed += 0 if result.passed else 1
    if failed:
        print(f"{failed} of {len(results)} checks failed")
        return 1
    print(f"all {len(results)} checks passed")
    return 0


# ---------------------------------------------------------------------------
# entry point


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hyperbell",
        description="Simulate a complete, deterministic polarization Bell-state analyzer.",
    )
    parser.add_argument("--version", action="version", version=f"hyperbell {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    state_names = [lab.value for lab in LABELS]

    p_analyze = sub.add_parser(
        "analyze", help="16-bin coincidence table and fidelity summary for one input state"
    )
    p_analyze.add_argument("--state", required=True, choices=state_names)
    p_analyze.add_argument("--config", help="JSON configuration file")
    p_analyze.add_argument("--shots", type=int, help="expected sampled events (overrides rate*time)")
    p_analyze.add_argument("--out", help="output path (stdout if omitted)")
    p_analyze.add_argument("--format", choices=["csv", "json"], default="csv")
    p_analyze.set_defaults(func=cmd_analyze)

    p_sweep = sub.add_parser("sweep", help="fidelity versus path delay for one input state")
    p_sweep.add_argument("--config", help="JSON configuration file")
    p_sweep.add_argument("--from-um", type=float, required=True, dest="from_um")
    p_sweep.add_argument("--to-um", type=float, required=True, dest="to_um")
    p_sweep.add_argument("--steps", type=int, required=True)
    p_sweep.add_argument("--state", default="psi+", choices=state_names)
    p_sweep.add_argument("--out", help="output path (stdout if omitted)")
    p_sweep.set_defaults(func=cmd_sweep)

    p_dec = sub.add_parser(
        "decompose", help="single-photon-basis coefficients of one input state"
    )
    p_dec.add_argument("--state", required=True, choices=state_names)
    p_dec.set_defaults(func=cmd_decompose)

    p_verify = sub.add_parser("verify", help="run the structural invariant suites")
    p_verify.add_argument(
        "--corrupt-decision-table",
        action="store_true",
        help=argparse.SUPPRESS,  # negative-control fixture for tests
    )
    p_verify.set_defaults(func=cmd_verify)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        _error(getattr(exc, "code", "ConfigError"), str(exc))
        return 2
    except ValueError as exc:
        _error("InvalidValue", str(exc))
        return 2
    except _IOFailure as exc:
        _error("IOError", str(exc))
        return 3
    except OSError as exc:
        _error("IOError", str(exc))
        return 3


if __name__ == "__main__":
    sys.exit(main())
