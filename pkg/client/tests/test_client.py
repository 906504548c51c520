import json
import socket
import subprocess
import sys
import threading

import numpy as np
import pytest

from proxops_client import (
    ConnectionFailed,
    RemoteLifecycleError,
    RemoteProtocolError,
    SpecMismatchError,
    connect,
)


class FakeServer:
    """Minimal line server answering only the spec command."""

    def __init__(self, spec):
        self.spec = spec
        self.sock = socket.socket()
        self.sock.bind(("127.0.0.1", 0))
        self.sock.listen(1)
        self.port = self.sock.getsockname()[1]
        self.thread = threading.Thread(target=self._serve, daemon=True)
        self.thread.start()

    def _serve(self):
        conn, _ = self.sock.accept()
        rfile = conn.makefile("r")
        wfile = conn.makefile("w")
        for line in rfile:
            request = json.loads(line)
            if request.get("cmd") == "spec":
                wfile.write(json.dumps({"spec": self.spec}) + "\n")
                wfile.flush()
            else:
                break
        conn.close()


class TestConnect:
    def test_spec_cached(self, server):
        host, port = server
        env = connect(host, port)
        assert env.obs_dim == 23
        assert env.action_dim == 8
        assert env.dt == 0.05
        env.close()

    def test_wrong_port_connection_error(self):
        with pytest.raises(ConnectionFailed):
            connect("127.0.0.1", 1, timeout=1.0)

    def test_spec_mismatch_typed_error(self):
        fake = FakeServer({"obs_dim": 23, "action_dim": 6, "dt": 0.05, "horizon": 10})
        with pytest.raises(SpecMismatchError):
            connect("127.0.0.1", fake.port)


class TestLifecycle:
    def test_step_before_reset_typed_error(self, server):
        host, port = server
        with connect(host, port) as env:
            with pytest.raises(RemoteLifecycleError) as err:
                env.step([0.0] * 8)
            assert err.value.code == "not_reset"

    def test_bad_action_protocol_error(self, server):
        host, port = server
        with connect(host, port) as env:
            env.reset(seed=0)
            with pytest.raises(RemoteProtocolError):
                env.step([0.0] * 5)

    def test_reset_deterministic(self, server):
        host, port = server
        with connect(host, port) as env:
            a = env.reset(seed=7)
            b = env.reset(seed=7)
            np.testing.assert_array_equal(a, b)
            assert a.shape == (23,)

    def test_out_of_range_action_clamped_server_side(self, server):
        host, port = server
        with connect(host, port) as e1, connect(host, port) as e2:
            e1.reset(seed=3)
            e2.reset(seed=3)
            o1, r1, *_ = e1.step(np.full(8, 1.5))
            o2, r2, *_ = e2.step(np.ones(8))
            np.testing.assert_array_equal(o1, o2)
            assert r1 == r2

    def test_info_keys(self, server):
        host, port = server
        with connect(host, port) as env:
            env.reset(seed=1)
            _, _, _, _, info = env.step([0.0] * 8)
            for key in ("dist_err_m", "ang_err_frob", "r_track", "r_align",
                        "r_stable", "p_mag", "p_rate"):
                assert key in info


class TestDualPath:
    def test_session_reproduces_cli_rollout_bit_identically(self, server, tmp_path):
        """The same seed and scripted action stream must yield bit-identical
        rewards over the wire and through the direct CLI rollout."""
        seed, steps = 5, 100
        out_dir = tmp_path / "cli"
        proc = subprocess.run(
            [sys.executable, "-m", "proxops", "rollout", "--episode", "hover",
             "--seed", str(seed), "--steps", str(steps), "--script", "random",
             "--out-dir", str(out_dir), "--no-figure"],
            capture_output=True, text=True, timeout=600,
        )
        assert proc.returncode == 0, proc.stderr
        lines = (out_dir / "rollout.csv").read_text().strip().split("\n")
        header = lines[0].split(",")
        reward_col = header.index("reward")
        cli_rewards = [float(ln.split(",")[reward_col]) for ln in lines[1:]]
        assert len(cli_rewards) == steps

        host, port = server
        rng = np.random.default_rng(seed)  # the documented 'random' script
        with connect(host, port) as env:
            env.reset(seed=seed)
            remote_rewards = []
            for _ in range(steps):
                action = rng.uniform(0.0, 1.0, size=8)
                _, reward, terminated, truncated, _ = env.step(action)
                remote_rewards.append(reward)
                assert not (terminated or truncated)
        assert remote_rewards == cli_rewards
