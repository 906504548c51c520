import json
import socket
import threading

import numpy as np
import pytest

from proxops.env import InspectionEnv
from proxops.server import EnvServer, EnvSession, serve_stdio

from test_env import hover_config


class LineClient:
    def __init__(self, host, port):
        self.sock = socket.create_connection((host, port), timeout=10)
        self.rfile = self.sock.makefile("r")
        self.wfile = self.sock.makefile("w")

    def request(self, obj):
        return self.request_raw(json.dumps(obj))

    def request_raw(self, line):
        self.wfile.write(line + "\n")
        self.wfile.flush()
        return json.loads(self.rfile.readline())

    def close(self):
        self.sock.close()


@pytest.fixture
def server(mk1):
    cfg = hover_config(mk1, horizon=200)
    srv = EnvServer(cfg, port=0)
    thread = threading.Thread(target=srv.serve_forever, daemon=True)
    thread.start()
    yield srv
    srv.shutdown()
    srv.server_close()


class TestSession:
    def test_spec_response(self, mk1):
        session = EnvSession(hover_config(mk1, horizon=123))
        out = session.handle_line(json.dumps({"cmd": "spec"}))
        assert out["spec"] == {"obs_dim": 23, "action_dim": 8, "dt": 0.05, "horizon": 123}

    def test_step_before_reset(self, mk1):
        session = EnvSession(hover_config(mk1))
        out = session.handle_line(json.dumps({"cmd": "step", "action": [0.0] * 8}))
        assert out["error"]["code"] == "not_reset"

    def test_malformed_line_keeps_session_usable(self, mk1):
        session = EnvSession(hover_config(mk1))
        out = session.handle_line("{not json")
        assert out["error"]["code"] == "bad_request"
        out = session.handle_line(json.dumps({"cmd": "reset", "seed": 1}))
        assert len(out["obs"]) == 23

    def test_bad_action_shape(self, mk1):
        session = EnvSession(hover_config(mk1))
        session.handle_line(json.dumps({"cmd": "reset", "seed": 1}))
        out = session.handle_line(json.dumps({"cmd": "step", "action": [0.0] * 7}))
        assert out["error"]["code"] == "bad_request"

    def test_step_after_episode_end(self, mk1):
        session = EnvSession(hover_config(mk1, horizon=1))
        session.handle_line(json.dumps({"cmd": "reset", "seed": 1}))
        out = session.handle_line(json.dumps({"cmd": "step", "action": [0.0] * 8}))
        assert out["truncated"] is True
        out = session.handle_line(json.dumps({"cmd": "step", "action": [0.0] * 8}))
        assert out["error"]["code"] == "episode_over"

    def test_unknown_cmd(self, mk1):
        session = EnvSession(hover_config(mk1))
        out = session.handle_line(json.dumps({"cmd": "warp"}))
        assert out["error"]["code"] == "bad_request"

    def test_close(self, mk1):
        session = EnvSession(hover_config(mk1))
        out = session.handle_line(json.dumps({"cmd": "close"}))
        assert out == {"ok": True}
        assert session.closed


class TestTcpServer:
    def test_protocol_equivalence_bit_identical(self, server, mk1):
        cfg = hover_config(mk1, horizon=200)
        env = InspectionEnv(cfg)
        obs_local = env.reset(seed=77)

        client = LineClient("127.0.0.1", server.port)
        spec = client.request({"cmd": "spec"})["spec"]
        assert spec["obs_dim"] == 23 and spec["action_dim"] == 8
        remote = client.request({"cmd": "reset", "seed": 77})
        assert remote["obs"] == list(obs_local)

        rng = np.random.default_rng(123)
        for _ in range(100):
            action = rng.uniform(0.0, 1.0, 8)
            obs_l, rew_l, term_l, trunc_l, _ = env.step(action)
            out = client.request({"cmd": "step", "action": list(action)})
            assert out["obs"] == list(obs_l)
            assert out["reward"] == rew_l
            assert out["terminated"] == term_l and out["truncated"] == trunc_l
        client.close()

    def test_reset_determinism_over_wire(self, server):
        client = LineClient("127.0.0.1", server.port)
        a = client.request({"cmd": "reset", "seed": 5})
        b = client.request({"cmd": "reset", "seed": 5})
        assert a == b
        client.close()

    def test_ten_concurrent_connections_independent(self, server, mk1):
        cfg = hover_config(mk1, horizon=200)
        clients = [LineClient("127.0.0.1", server.port) for _ in range(10)]
        for i, c in enumerate(clients):
            c.request({"cmd": "reset", "seed": 1000 + i})

        locals_ = []
        for i in range(10):
            env = InspectionEnv(cfg)
            env.reset(seed=1000 + i)
            locals_.append(env)

        rngs = [np.random.default_rng(i) for i in range(10)]
        # interleave steps across connections
        for k in range(20):
            for i, c in enumerate(clients):
                action = rngs[i].uniform(0, 1, 8)
                out = c.request({"cmd": "step", "action": list(action)})
                obs_l, rew_l, *_ = locals_[i].step(action)
                assert out["obs"] == list(obs_l)
                assert out["reward"] == rew_l
        for c in clients:
            c.close()

    def test_malformed_then_usable_over_wire(self, server):
        client = LineClient("127.0.0.1", server.port)
        out = client.request_raw("this is not json")
        assert out["error"]["code"] == "bad_request"
        out = client.request({"cmd": "reset", "seed": 0})
        assert "obs" in out
        client.close()


class TestPortSelection:
    def test_default_port_from_env_var(self, mk1, monkeypatch):
        import proxops.server as srv

        monkeypatch.setenv(srv.DEFAULT_PORT_ENV_VAR, "0")
        server = EnvServer(hover_config(mk1))
        try:
            assert server.port > 0  # 0 requested a free ephemeral port
        finally:
            server.server_close()


class TestStdioServer:
    def test_stdio_round_trip(self, mk1):
        import io

        cfg = hover_config(mk1, horizon=5)
        lines = [
            json.dumps({"cmd": "spec"}),
            json.dumps({"cmd": "reset", "seed": 9}),
            json.dumps({"cmd": "step", "action": [0.5] * 8}),
            json.dumps({"cmd": "close"}),
            json.dumps({"cmd": "spec"}),  # after close: must not be served
        ]
        stdin = io.StringIO("\n".join(lines) + "\n")
        stdout = io.StringIO()
        serve_stdio(cfg, stdin=stdin, stdout=stdout)
        out = [json.loads(ln) for ln in stdout.getvalue().strip().split("\n")]
        assert len(out) == 4
        assert out[0]["spec"]["obs_dim"] == 23
        assert len(out[1]["obs"]) == 23
        assert "reward" in out[2]
        assert out[3] == {"ok": True}
