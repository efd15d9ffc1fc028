import pathlib
import subprocess
import sys

SCRIPT = pathlib.Path(__file__).resolve().parents[1] / "benchmarks" / "bench_kernels.py"


def test_kernel_benchmark_runs_and_backends_agree():
    out = subprocess.run([sys.executable, str(SCRIPT), "--repeat", "1"], capture_output=True, text=True)
    assert out.returncode == 0, out.stderr
    assert "python" in out.stdout and "wheel9 robbins" in out.stdout
