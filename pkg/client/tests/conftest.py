import re
import subprocess
import sys

import pytest


@pytest.fixture(scope="session")
def server():
    """The environment server, driven purely through its public CLI."""
    proc = subprocess.Popen(
        [sys.executable, "-m", "proxops", "serve", "--episode", "hover",
         "--transport", "tcp", "--port", "0"],
        stdout=subprocess.PIPE, stderr=subprocess.PIPE, text=True,
    )
    line = proc.stdout.readline()
    match = re.search(r"serving environment on ([\d.]+):(\d+)", line)
    if not match:
        proc.kill()
        raise RuntimeError(f"server did not announce its port: {line!r}")
    host, port = match.group(1), int(match.group(2))
    yield host, port
    proc.terminate()
    try:
        proc.wait(timeout=10)
    except subprocess.TimeoutExpired:
        proc.kill()
