import io
import json
import math
import subprocess
import sys
import types

import pytest

from csmetrics.cli import run
from csmetrics.core import ConvergenceError


def invoke(argv, stdin: bytes = b"", monkeypatch=None):
    """Run the CLI in-process, returning (exit_code, stdout_bytes, stderr_text)."""
    import csmetrics.cli as cli

    stdout = io.BytesIO()
    stderr = io.StringIO()
    fake_out = types.SimpleNamespace(buffer=stdout, write=lambda s: stdout.write(s.encode()),
                                     flush=lambda: None)
    fake_in = types.SimpleNamespace(buffer=io.BytesIO(stdin))
    old_out, old_err, old_in = sys.stdout, sys.stderr, sys.stdin
    sys.stdout, sys.stderr, sys.stdin = fake_out, stderr, fake_in
    try:
        code = run(argv)
    finally:
        sys.stdout, sys.stderr, sys.stdin = old_out, old_err, old_in
    return code, stdout.getvalue(), stderr.getvalue()


def pipeline(*commands, stdin=b""):
    data = stdin
    for argv in commands:
        proc = subprocess.run([sys.executable, "-m", "csmetrics", *argv],
                              input=data, capture_output=True)
        assert proc.returncode == 0, proc.stderr.decode()
        data = proc.stdout
    return data


class TestWelch:
    def test_prints_17_digit_value(self):
        code, out, _ = invoke(["welch", "--m", "2", "--n", "4"])
        assert code == 0
        assert out == b"0.57735026918962573\n"

    def test_missing_flag_is_usage_error(self):
        code, _, err = invoke(["welch", "--m", "2"])
        assert code == 2
        assert "usage" in err

    def test_domain_error_is_usage_error(self):
        code, _, err = invoke(["welch", "--m", "5", "--n", "2"])
        assert code == 2


class TestUsage:
    def test_unknown_subcommand(self):
        code, _, err = invoke(["frobnicate"])
        assert code == 2

    def test_no_subcommand(self):
        code, _, err = invoke([])
        assert code == 2
        assert "usage" in err

    def test_unknown_flag(self):
        code, _, _ = invoke(["welch", "--m", "1", "--n", "2", "--frob"])
        assert code == 2

    def test_version_exits_zero(self):
        code, _, _ = invoke(["--version"])
        assert code == 0


class TestGen:
    def test_fourier_rows_deterministic(self):
        a = invoke(["gen", "fourier", "--n", "8", "--rows", "1,2,5"])
        b = invoke(["gen", "fourier", "--n", "8", "--rows", "1,2,5"])
        assert a[0] == 0 and a[1] == b[1]

    def test_fourier_sampled_requires_seed(self):
        code, _, err = invoke(["gen", "fourier", "--n", "8", "--m", "3"])
        assert code == 2
        assert "--seed" in err

    def test_fourier_rows_and_m_conflict(self):
        code, _, _ = invoke(["gen", "fourier", "--n", "8", "--rows", "1", "--m", "2",
                             "--seed", "1"])
        assert code == 2

    def test_fourier_invalid_rows(self):
        code, _, _ = invoke(["gen", "fourier", "--n", "4", "--rows", "3,1"])
        assert code == 2

    def test_gaussian_requires_seed(self):
        code, _, _ = invoke(["gen", "gaussian", "--m", "2", "--n", "3"])
        assert code == 2

    def test_gaussian_deterministic(self):
        a = invoke(["gen", "gaussian", "--m", "2", "--n", "3", "--seed", "11"])
        b = invoke(["gen", "gaussian", "--m", "2", "--n", "3", "--seed", "11"])
        assert a[0] == 0 and a[1] == b[1]


class TestAnalyze:
    def test_full_fourier_is_unitary(self):
        _, matrix, _ = invoke(["gen", "fourier", "--n", "6"])
        code, out, _ = invoke(["analyze"], stdin=matrix)
        assert code == 0
        report = json.loads(out)
        assert abs(report["sigma_max"] - 1.0) <= 1e-10
        # square unitary: columns already normalized, coherence ~ 0
        assert report["coherence"] == pytest.approx(0.0, abs=1e-12)

    def test_partial_fourier_variance(self):
        _, matrix, _ = invoke(["gen", "fourier", "--n", "8", "--rows", "1,2,5"])
        code, out, _ = invoke(["analyze"], stdin=matrix)
        assert code == 0
        report = json.loads(out)
        assert report["row_mean"]["variance"] == pytest.approx(5 / 56, rel=1e-10)
        assert report["shape"] == [3, 8]
        assert report["coherence"] is None  # columns have norm sqrt(m/N) < 1

    def test_byte_stable(self):
        _, matrix, _ = invoke(["gen", "fourier", "--n", "8", "--rows", "1,2,5"])
        first = invoke(["analyze"], stdin=matrix)
        second = invoke(["analyze"], stdin=matrix)
        assert first[1] == second[1]

    def test_normalize_enables_coherence(self):
        _, matrix, _ = invoke(["gen", "fourier", "--n", "8", "--rows", "1,2,5"])
        code, out, _ = invoke(["analyze", "--normalize"], stdin=matrix)
        report = json.loads(out)
        assert report["coherence"] is not None
        assert report["slack"] >= -1e-12
        labels = [b["label"] for b in report["bounds"]]
        assert "stddev_coherence_upper" in labels

    def test_normalized_input_gets_coherence_without_flag(self):
        _, matrix, _ = invoke(["gen", "gaussian", "--m", "2", "--n", "4", "--seed", "3",
                               "--normalize"])
        _, out, _ = invoke(["analyze"], stdin=matrix)
        assert json.loads(out)["coherence"] is not None

    def test_zero_column_with_normalize_is_input_error(self):
        code, _, err = invoke(["analyze", "--normalize"], stdin=b"1+0j, 0\n1, 0\n")
        assert code == 2
        assert "column 1" in err

    def test_missing_file(self):
        code, _, _ = invoke(["analyze", "/nonexistent/matrix.json"])
        assert code == 2

    def test_malformed_input(self):
        code, _, err = invoke(["analyze"], stdin=b'{"m":2,"n":2,"entries":[[1,0]]}')
        assert code == 2

    def test_tall_matrix_rejected(self):
        code, _, _ = invoke(["analyze"], stdin=b"1\n2\n3\n")
        assert code == 2

    def test_convergence_failure_maps_to_exit_3(self, monkeypatch):
        def explode(a):
            raise ConvergenceError("no convergence", residual=0.5)

        monkeypatch.setattr("csmetrics.cli.spectral", explode)
        code, _, err = invoke(["analyze"], stdin=b"1, 0\n0, 1j\n")
        assert code == 3
        assert "numerical" in err


class TestVerify:
    def test_small_sweep_passes(self):
        code, out, err = invoke(["verify", "--max-n", "6", "--trials", "5", "--seed", "7"])
        assert code == 0
        assert out == b""
        assert "0 failures" in err

    def test_seed_required(self):
        code, _, _ = invoke(["verify", "--max-n", "4"])
        assert code == 2

    def test_failures_print_and_exit_1(self, monkeypatch):
        def rigged(rng, max_n, trials, failures):
            failures.append("FAIL synthetic check")
            return 1

        monkeypatch.setattr("csmetrics.cli._verify_multisets", rigged)
        code, out, _ = invoke(["verify", "--max-n", "2", "--trials", "1", "--seed", "1"])
        assert code == 1
        assert b"FAIL synthetic check" in out


class TestSample:
    def test_deterministic_and_close_to_prediction(self):
        _, matrix, _ = invoke(["gen", "gaussian", "--m", "3", "--n", "6", "--seed", "5"])
        first = invoke(["sample", "--k", "20000", "--seed", "9"], stdin=matrix)
        second = invoke(["sample", "--k", "20000", "--seed", "9"], stdin=matrix)
        assert first[0] == 0
        assert first[1] == second[1]
        payload = json.loads(first[1])
        assert payload["subset_size"] == 3
        assert payload["sample"]["variance"] == pytest.approx(
            payload["predicted"]["variance"], rel=0.1
        )

    def test_subset_size_flag(self):
        _, matrix, _ = invoke(["gen", "gaussian", "--m", "2", "--n", "5", "--seed", "5"])
        code, out, _ = invoke(["sample", "--m", "4", "--k", "100", "--seed", "9"],
                              stdin=matrix)
        assert code == 0
        assert json.loads(out)["subset_size"] == 4

    def test_subset_size_out_of_range(self):
        _, matrix, _ = invoke(["gen", "gaussian", "--m", "2", "--n", "3", "--seed", "5"])
        code, _, _ = invoke(["sample", "--m", "9", "--k", "10", "--seed", "1"], stdin=matrix)
        assert code == 2


class TestSubprocessPipeline:
    def test_gen_analyze_pipe(self):
        out = pipeline(["gen", "fourier", "--n", "8", "--rows", "1,2,5"], ["analyze"])
        report = json.loads(out)
        assert report["row_mean"]["variance"] == pytest.approx(5 / 56, rel=1e-10)

    def test_full_fourier_sigma_via_pipe(self):
        out = pipeline(
            ["gen", "fourier", "--n", "8", "--rows", "0,1,2,3,4,5,6,7"], ["analyze"]
        )
        assert abs(json.loads(out)["sigma_max"] - 1.0) <= 1e-10
