"""Newline-delimited JSON environment server.

One connection drives exactly one environment; requests and responses
alternate strictly. The grammar (documented with examples in
docs/protocol.md):

    -> {"cmd": "spec"}
    <- {"spec": {"obs_dim": 23, "action_dim": 8, "dt": 0.05, "horizon": 250}}

    -> {"cmd": "reset", "seed": 7}
    <- {"obs": [... 23 numbers ...]}

    -> {"cmd": "step", "action": [... 8 numbers ...]}
    <- {"obs": [...], "reward": r, "terminated": false, "truncated": false,
        "info": {...}}

    -> {"cmd": "close"}
    <- {"ok": true}

Errors come back as {"error": {"code": ..., "message": ...}} and leave the
connection usable. Floats are serialized with their shortest exact decimal
representation, so every value round-trips bit-identically.
"""

import json
import os
import socketserver
import sys

from .env import ACTION_DIM, OBS_DIM, InspectionEnv
from .errors import LifecycleError, ProxopsError

DEFAULT_PORT_ENV_VAR = "PROXOPS_PORT"
DEFAULT_PORT = 7482


class EnvSession:
    """Protocol state machine around one environment instance."""

    def __init__(self, episode_config):
        self.env = InspectionEnv(episode_config)
        self.closed = False
        self._has_episode = False

    def handle_line(self, line):
        """One request line in, one response dict out."""
        try:
            request = json.loads(line)
        except json.JSONDecodeError as exc:
            return _error("bad_request", f"malformed JSON: {exc}")
        if not isinstance(request, dict) or "cmd" not in request:
            return _error("bad_request", "request must be an object with a 'cmd' key")
        cmd = request["cmd"]
        try:
            if cmd == "spec":
                return self._spec()
            if cmd == "reset":
                return self._reset(request)
            if cmd == "step":
                return self._step(request)
            if cmd == "close":
                self.closed = True
                return {"ok": True}
            return _error("bad_request", f"unknown cmd '{cmd}'")
        except LifecycleError as exc:
            return _error("episode_over", str(exc))
        except ProxopsError as exc:
            return _error("internal", str(exc))

    def _spec(self):
        cfg = self.env.config
        return {
            "spec": {
                "obs_dim": OBS_DIM,
                "action_dim": ACTION_DIM,
                "dt": cfg.dt,
                "horizon": cfg.horizon,
            }
        }

    def _reset(self, request):
        seed = request.get("seed")
        if seed is not None and not isinstance(seed, int):
            return _error("bad_request", "seed must be an integer")
        obs = self.env.reset(seed=seed)
        self._has_episode = True
        return {"obs": list(obs)}

    def _step(self, request):
        if not self._has_episode:
            return _error("not_reset", "step before reset; send a reset first")
        action = request.get("action")
        if (
            not isinstance(action, list)
            or len(action) != ACTION_DIM
            or not all(isinstance(a, (int, float)) for a in action)
        ):
            return _error("bad_request", f"action must be a list of {ACTION_DIM} numbers")
        obs, reward, terminated, truncated, info = self.env.step(action)
        return {
            "obs": list(obs),
            "reward": reward,
            "terminated": terminated,
            "truncated": truncated,
            "info": info,
        }


def _error(code, message):
    return {"error": {"code": code, "message": message}}


def serve_stdio(episode_config, stdin=None, stdout=None):
    """Serve one environment over stdin/stdout until EOF or close."""
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout
    session = EnvSession(episode_config)
    for line in stdin:
        line = line.strip()
        if not line:
            continue
        response = session.handle_line(line)
        stdout.write(json.dumps(response) + "\n")
        stdout.flush()
        if session.closed:
            break


class _LineHandler(socketserver.StreamRequestHandler):
    def handle(self):
        session = EnvSession(self.server.episode_config)
        while True:
            raw = self.rfile.readline()
            if not raw:
                break
            line = raw.decode("utf-8").strip()
            if not line:
                continue
            response = session.handle_line(line)
            self.wfile.write((json.dumps(response) + "\n").encode("utf-8"))
            self.wfile.flush()
            if session.closed:
                break


class EnvServer(socketserver.ThreadingTCPServer):
    """One environment per connection; no state shared across connections."""

    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, episode_config, host="127.0.0.1", port=None):
        if port is None:
            port = int(os.environ.get(DEFAULT_PORT_ENV_VAR, DEFAULT_PORT))
        super().__init__((host, port), _LineHandler)
        self.episode_config = episode_config

    @property
    def port(self):
        return self.server_address[1]


def serve_tcp(episode_config, host="127.0.0.1", port=None):
    """Blocking TCP server; prints the bound port before serving."""
    server = EnvServer(episode_config, host=host, port=port)
    print(f"serving environment on {server.server_address[0]}:{server.port}", flush=True)
    try:
        server.serve_forever()
    finally:
        server.server_close()
