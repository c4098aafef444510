"""Command-line front end: analyze, gen, verify, sample, welch.

Machine-readable output goes to standard output, human-readable summaries to
standard error.  Exit codes: 0 success, 1 a checked inequality or
verification failed, 2 usage or input error, 3 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from . import __version__
from .core import (
    ConvergenceError,
    DenseMatrix,
    DomainError,
    PreconditionError,
    ResourceLimitError,
    Seed,
    TolerancePolicy,
    make_rng,
    multiset_from_values,
    standard_normal_complex,
)
from .fourier import (
    PartialFourierSpec,
    dft_matrix,
    partial_fourier,
    partial_fourier_closed_form,
    random_matrix,
    sample_row_indices,
)
from .io_report import (
    AnalysisReport,
    ParseError,
    emit_report,
    format_real,
    parse_matrix_file,
    serialize_matrix,
)
from .matrix_metrics import (
    coherence,
    etf_check,
    frobenius_norm,
    normalize_columns,
    spectral,
    welch_bound,
)
from .row_ensemble import (
    coherence_bounds_check,
    frobenius_upper_bound,
    row_mean_moments,
    row_multiset,
    spectral_lower_bound,
)
from .subset_stats import (
    _draw_subset_sums,
    _stats_from_draws,
    brute_force_moments,
    closed_form_moments,
    variance_pairwise,
)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_NUMERICAL = 3

_VERIFY_REL_TOL = 1e-10
_VERIFY_ABS_TOL = 1e-12


def _err(message: str) -> None:
    print(f"csmetrics: {message}", file=sys.stderr)


def _read_input(path: str) -> bytes:
    if path == "-":
        return sys.stdin.buffer.read()
    with open(path, "rb") as handle:
        return handle.read()


def _write_stdout(data: bytes) -> None:
    sys.stdout.buffer.write(data)
    sys.stdout.buffer.write(b"\n")
    sys.stdout.buffer.flush()


def _parse_seed(value: str) -> Seed:
    return Seed(int(value, 0))


def _build_report(a: DenseMatrix, policy: TolerancePolicy, seed: int | None) -> AnalysisReport:
    est = spectral(a)
    stats = row_mean_moments(a)
    bounds = [spectral_lower_bound(a, est), frobenius_upper_bound(a)]
    try:
        coh = coherence(a, policy)
    except PreconditionError:
        coh = None
    if coh is not None:
        bounds.extend(coherence_bounds_check(a, coh, policy))
    return AnalysisReport(
        shape=(a.m, a.n),
        frobenius=frobenius_norm(a),
        sigma_max=est.sigma_max,
        lambda_max=est.lambda_max,
        coherence=None if coh is None else coh.mu,
        welch=welch_bound(a.m, a.n),
        slack=None if coh is None else coh.slack,
        etf=etf_check(a, policy),
        row_mean=stats,
        bounds=tuple(bounds),
        tool_version=__version__,
        seed=seed,
    )


def _cmd_analyze(args) -> int:
    policy = TolerancePolicy(abs_tol=min(1e-12, args.tol), rel_tol=args.tol) \
        if args.tol is not None else TolerancePolicy()
    a = parse_matrix_file(_read_input(args.file))
    if args.normalize:
        a = normalize_columns(a)
    report = _build_report(a, policy, seed=None)
    _write_stdout(emit_report(report))
    mu = "n/a (columns not normalized; pass --normalize)" if report.coherence is None \
        else format_real(report.coherence)
    _err(f"analyzed {a.m}x{a.n} matrix: frobenius={format_real(report.frobenius)} "
         f"sigma_max={format_real(report.sigma_max)} coherence={mu}")
    violated = [b.label for b in report.bounds if not b.holds]
    if violated:
        _err(f"violated bounds: {', '.join(violated)}")
        return EXIT_CHECK_FAILED
    return EXIT_OK


def _cmd_gen(args) -> int:
    if args.kind == "fourier":
        if args.rows is not None and args.m is not None:
            _err("--rows and --m are mutually exclusive")
            return EXIT_USAGE
        if args.rows is not None:
            spec = PartialFourierSpec(n=args.n, row_indices=tuple(args.rows))
            matrix = partial_fourier(spec)
        elif args.m is not None:
            if args.seed is None:
                _err("--m requires an explicit --seed")
                return EXIT_USAGE
            matrix = partial_fourier(sample_row_indices(args.n, args.m, args.seed))
        else:
            matrix = dft_matrix(args.n)
    else:
        matrix = random_matrix(args.m, args.n, args.seed, normalized=args.normalize)
    _write_stdout(serialize_matrix(matrix))
    _err(f"generated {matrix.m}x{matrix.n} {args.kind} matrix")
    return EXIT_OK


def _close(got: float, want: float) -> bool:
    return math.isclose(got, want, rel_tol=_VERIFY_REL_TOL, abs_tol=_VERIFY_ABS_TOL)


def _close_complex(got: complex, want: complex) -> bool:
    return _close(got.real, want.real) and _close(got.imag, want.imag)


def _verify_multisets(rng, max_n: int, trials: int, failures: list[str]) -> int:
    checked = 0
    for n in range(2, max_n + 1):
        for m in range(1, n + 1):
            for trial in range(trials):
                values = standard_normal_complex(rng, n)
                phi = multiset_from_values(complex(z) for z in values)
                cf = closed_form_moments(phi, m)
                bf = brute_force_moments(phi, m)
                checked += 1
                for field, got, want in (
                    ("mean", cf.mean, bf.mean),
                    ("variance", cf.variance, bf.variance),
                    ("second_abs_moment", cf.second_abs_moment, bf.second_abs_moment),
                ):
                    ok = _close_complex(got, want) if isinstance(got, complex) else _close(got, want)
                    if not ok:
                        failures.append(
                            f"FAIL closed-form-vs-enumeration N={n} m={m} trial={trial} "
                            f"field={field} got={got!r} want={want!r}"
                        )
                pairwise = variance_pairwise(phi, m)
                if not _close(pairwise, cf.variance):
                    failures.append(
                        f"FAIL pairwise-variance N={n} m={m} trial={trial} "
                        f"got={pairwise!r} want={cf.variance!r}"
                    )
    return checked


def _verify_row_means(rng, max_n: int, trials: int, failures: list[str]) -> int:
    checked = 0
    matrix_trials = max(1, trials // 10)
    for n in range(2, max_n + 1):
        for m in range(1, n + 1):
            for trial in range(matrix_trials):
                entries = standard_normal_complex(rng, m * n).reshape(m, n)
                a = DenseMatrix(entries)
                stats = row_mean_moments(a)
                per_row = math.fsum(
                    brute_force_moments(row_multiset(a, i), m).variance for i in range(m)
                )
                checked += 1
                if not _close(stats.variance, per_row / (m * m)):
                    failures.append(
                        f"FAIL row-mean-additivity m={m} N={n} trial={trial} "
                        f"got={stats.variance!r} want={per_row / (m * m)!r}"
                    )
    return checked


def _verify_partial_fourier(rng, max_n: int, failures: list[str]) -> int:
    checked = 0
    for n in range(2, max_n + 1):
        for m in range(1, n + 1):
            cases = []
            if m <= n - 1:
                body = 1 + np.sort(
                    make_rng(Seed(int(rng.integers(0, 2 ** 63)))).permutation(n - 1)[:m]
                )
                cases.append(tuple(int(i) for i in body))
            head = (0,) if m == 1 else (0, *sorted(
                int(i) + 1
                for i in make_rng(Seed(int(rng.integers(0, 2 ** 63)))).permutation(n - 1)[:m - 1]
            ))
            cases.append(head)
            for rows in cases:
                spec = PartialFourierSpec(n=n, row_indices=rows)
                stats = row_mean_moments(partial_fourier(spec))
                want = partial_fourier_closed_form(n, m, spec.has_first_row)
                checked += 1
                if not (_close_complex(stats.mean, want.mean)
                        and _close(stats.variance, want.variance)):
                    failures.append(
                        f"FAIL partial-fourier n={n} m={m} rows={rows} "
                        f"got=({stats.mean!r}, {stats.variance!r}) "
                        f"want=({want.mean!r}, {want.variance!r})"
                    )
    return checked


def _cmd_verify(args) -> int:
    rng = make_rng(args.seed)
    failures: list[str] = []
    checked = _verify_multisets(rng, args.max_n, args.trials, failures)
    checked += _verify_row_means(rng, args.max_n, args.trials, failures)
    checked += _verify_partial_fourier(rng, args.max_n, failures)
    for line in failures:
        print(line)
    _err(f"verify: {checked} checks, {len(failures)} failures "
         f"(max-n={args.max_n}, trials={args.trials})")
    return EXIT_CHECK_FAILED if failures else EXIT_OK


def _cmd_sample(args) -> int:
    a = parse_matrix_file(_read_input(args.file))
    subset_size = args.m if args.m is not None else a.m
    if not 1 <= subset_size <= a.n:
        raise DomainError(f"subset size m={subset_size} must satisfy 1 <= m <= N={a.n}")
    rng = make_rng(args.seed)
    acc = np.zeros(args.k, dtype=np.complex128)
    for i in range(a.m):
        acc += _draw_subset_sums(a.array[i], subset_size, rng, args.k)
    stats = _stats_from_draws(acc / a.m)
    per_row = [closed_form_moments(row_multiset(a, i), subset_size) for i in range(a.m)]
    predicted_mean = sum(r.mean for r in per_row) / a.m
    predicted_variance = math.fsum(r.variance for r in per_row) / (a.m * a.m)
    text = (
        f'{{"schema":1,"shape":[{a.m},{a.n}],"subset_size":{subset_size},'
        f'"draws":{stats.draws},"seed":{args.seed.value},'
        f'"sample":{{"mean":[{format_real(stats.sample_mean.real)},'
        f'{format_real(stats.sample_mean.imag)}],'
        f'"variance":{format_real(stats.sample_variance)},'
        f'"second_abs_moment":{format_real(stats.sample_second_abs_moment)}}},'
        f'"predicted":{{"mean":[{format_real(predicted_mean.real)},'
        f'{format_real(predicted_mean.imag)}],'
        f'"variance":{format_real(predicted_variance)}}}}}'
    )
    _write_stdout(text.encode("ascii"))
    _err(f"sampled {stats.draws} row-mean draws (subset size {subset_size}): "
         f"variance {format_real(stats.sample_variance)} "
         f"vs predicted {format_real(predicted_variance)}")
    return EXIT_OK


def _cmd_welch(args) -> int:
    print(f"{welch_bound(args.m, args.n):.17g}")
    return EXIT_OK


def _positive_int(value: str) -> int:
    parsed = int(value)
    if parsed < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {value}")
    return parsed


def _row_list(value: str) -> list[int]:
    try:
        return [int(part) for part in value.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {value!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="csmetrics",
        description="Measurement-matrix quality metrics and subset-sum statistics.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="command")

    p = sub.add_parser("analyze", help="analyze a matrix file (stdin with '-')")
    p.add_argument("file", nargs="?", default="-")
    p.add_argument("--normalize", action="store_true",
                   help="l2-normalize columns before analysis (required for coherence "
                        "unless columns already are)")
    p.add_argument("--tol", type=float, default=None, metavar="REL",
                   help="override the relative tolerance")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("gen", help="generate a matrix file on stdout")
    kinds = p.add_subparsers(dest="kind", metavar="kind", required=True)
    f = kinds.add_parser("fourier", help="full or partial Fourier matrix")
    f.add_argument("--n", type=_positive_int, required=True)
    f.add_argument("--rows", type=_row_list, default=None,
                   help="comma-separated row indices, strictly increasing")
    f.add_argument("--m", type=_positive_int, default=None,
                   help="number of rows to sample (needs --seed)")
    f.add_argument("--seed", type=_parse_seed, default=None)
    g = kinds.add_parser("gaussian", help="seeded complex Gaussian matrix")
    g.add_argument("--m", type=_positive_int, required=True)
    g.add_argument("--n", type=_positive_int, required=True)
    g.add_argument("--seed", type=_parse_seed, required=True)
    g.add_argument("--normalize", action="store_true")
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("verify", help="sweep closed forms against enumeration")
    p.add_argument("--max-n", type=_positive_int, required=True, dest="max_n")
    p.add_argument("--trials", type=_positive_int, default=20)
    p.add_argument("--seed", type=_parse_seed, required=True)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("sample", help="Monte Carlo row-mean draws vs closed form")
    p.add_argument("file", nargs="?", default="-")
    p.add_argument("--m", type=_positive_int, default=None,
                   help="subset size per row (default: the matrix row count)")
    p.add_argument("--k", type=_positive_int, required=True)
    p.add_argument("--seed", type=_parse_seed, required=True)
    p.set_defaults(func=_cmd_sample)

    p = sub.add_parser("welch", help="print the coherence lower bound")
    p.add_argument("--m", type=_positive_int, required=True)
    p.add_argument("--n", type=_positive_int, required=True)
    p.set_defaults(func=_cmd_welch)

    return parser


def run(argv: list[str]) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    if getattr(args, "func", None) is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except ConvergenceError as exc:
        _err(f"numerical failure: {exc}")
        return EXIT_NUMERICAL
    except (DomainError, ParseError, ResourceLimitError) as exc:
        _err(str(exc))
        return EXIT_USAGE
    except OSError as exc:
        _err(f"cannot read input: {exc}")
        return EXIT_USAGE


def main() -> None:
    sys.exit(run(sys.argv[1:]))
