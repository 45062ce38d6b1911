"""Command-line front end; thin wrappers over the library and service."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .dsl import parse_network
from .evaluation import (
    accuracy_report,
    generate_synthetic_records,
    load_sales_csv,
    write_sales_csv,
)
from .inference import (
    DEFAULT_BANDWIDTH,
    METHOD_CONVOLUTION,
    METHOD_KDE,
    equation_mean_ci,
    forward_sample,
    posterior_given_equation_evidence,
)


def _load_model(path: str):
    return parse_network(Path(path).read_text(encoding="utf-8"))


def _parse_clamps(pairs: list[str] | None) -> dict[str, str]:
    clamps = {}
    for pair in pairs or []:
        if "=" not in pair:
            raise ValueError(f"--clamp expects node=state, got {pair!r}")
        node, _, state = pair.partition("=")
        clamps[node.strip()] = state.strip()
    return clamps


def cmd_validate(args) -> int:
    _load_model(args.model)
    print("OK")
    return 0


def cmd_sample(args) -> int:
    net = _load_model(args.model)
    samples = forward_sample(net, args.n, args.seed, _parse_clamps(args.clamp))
    if samples.values is None:
        raise ValueError("model has no equation node to sample")
    mean, ci = equation_mean_ci(samples)
    print(f"n: {args.n}  seed: {args.seed}")
    print(f"mean: {mean:.4f}")
    print(f"95% CI: ({ci[0]:.4f}, {ci[1]:.4f})")
    return 0


def cmd_posterior(args) -> int:
    net = _load_model(args.model)
    report = posterior_given_equation_evidence(
        net,
        args.sales,
        args.method,
        bandwidth=args.bandwidth,
        n=args.n,
        seed=args.seed,
    )
    print(f"method: {report.method}")
    for node, probs in report.probabilities.items():
        cells = "  ".join(f"{state} {p:.2f}" for state, p in probs.items())
        print(f"{node}: {cells}")
    return 0


def cmd_report(args) -> int:
    records = load_sales_csv(args.data)
    net = _load_model(args.model)
    report = accuracy_report(records, net, n=args.n, seed=args.seed)
    print(report.to_text(), end="")
    out = Path(args.out)
    out.write_text(report.to_json(), encoding="utf-8")
    print(f"wrote {out}")
    return 0


def cmd_synth(args) -> int:
    records = generate_synthetic_records(args.seed)
    write_sales_csv(records, args.out)
    print(f"wrote {args.out} ({len(records)} records)")
    return 0


def cmd_serve(args) -> int:
    from .service import default_port, serve

    serve(port=args.port if args.port is not None else default_port(), host=args.host)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="promobn",
        description="Promotional-sales Bayesian network toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="parse and validate a .bnet model file")
    p.add_argument("model")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("sample", help="forward-sample the equation node")
    p.add_argument("model")
    p.add_argument("--n", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument(
        "--clamp",
        action="append",
        metavar="NODE=STATE",
        help="clamp a chance node (repeatable)",
    )
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("posterior", help="discrete posteriors given an observed value")
    p.add_argument("model")
    p.add_argument("--sales", type=float, required=True, help="observed equation value")
    p.add_argument(
        "--method",
        choices=[METHOD_CONVOLUTION, METHOD_KDE],
        default=METHOD_CONVOLUTION,
    )
    p.add_argument("--bandwidth", type=float, default=DEFAULT_BANDWIDTH)
    p.add_argument("--n", type=int, default=100_000, help="iterations for the KDE method")
    p.add_argument("--seed", type=int, default=42)
    p.set_defaults(func=cmd_posterior)

    p = sub.add_parser("report", help="forecast-accuracy comparison from a sales CSV")
    p.add_argument("data", help="weekly sales CSV")
    p.add_argument("model")
    p.add_argument("--n", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", default="table3.json", help="machine-readable report path")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("synth", help="generate the synthetic weekly-sales fixture")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", default="synthetic_sales.csv")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("serve", help="run the what-if HTTP service")
    p.add_argument("--port", type=int, default=None, help="default $PROMO_BN_PORT or 8080")
    p.add_argument("--host", default="127.0.0.1")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
