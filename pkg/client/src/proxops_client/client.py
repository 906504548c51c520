"""Reset/step adapter over the environment server's line protocol.

The client is deliberately logic-free: every numeric value crosses the wire
and this adapter without modification, so a remote session is bit-identical
to driving the simulator in-process. All semantics live server-side.

    env = connect("127.0.0.1", 7482)
    obs = env.reset(seed=7)
    obs, reward, terminated, truncated, info = env.step([0.0] * env.action_dim)
    env.close()
"""

import json
import socket

import numpy as np

EXPECTED_OBS_DIM = 23
EXPECTED_ACTION_DIM = 8


class ClientError(Exception):
    """Base class for client-side failures."""


class ConnectionFailed(ClientError):
    """The server endpoint could not be reached or the link dropped."""


class SpecMismatchError(ClientError):
    """The server's advertised dimensions differ from the expected contract."""


class RemoteProtocolError(ClientError):
    """The server rejected a request as malformed."""

    def __init__(self, code, message):
        super().__init__(f"{code}: {message}")
        self.code = code


class RemoteLifecycleError(RemoteProtocolError):
    """An episode operation was issued in the wrong phase (e.g. step before
    reset, or after the episode ended)."""


class RemoteServerError(RemoteProtocolError):
    """The server reported an internal failure."""


_ERROR_TYPES = {
    "not_reset": RemoteLifecycleError,
    "episode_over": RemoteLifecycleError,
    "bad_request": RemoteProtocolError,
    "internal": RemoteServerError,
}


class RemoteEnv:
    """One connection, one environment; not shareable across workers."""

    def __init__(self, sock, spec):
        self._sock = sock
        self._rfile = sock.makefile("r", encoding="utf-8")
        self._wfile = sock.makefile("w", encoding="utf-8")
        self.spec = spec
        self.obs_dim = int(spec["obs_dim"])
        self.action_dim = int(spec["action_dim"])
        self.dt = spec["dt"]
        self.horizon = spec["horizon"]
        self._closed = False

    # -- protocol plumbing -------------------------------------------------

    def _request(self, payload):
        if self._closed:
            raise ClientError("connection already closed")
        try:
            self._wfile.write(json.dumps(payload) + "\n")
            self._wfile.flush()
            line = self._rfile.readline()
        except OSError as exc:
            raise ConnectionFailed(f"transport failure: {exc}") from exc
        if not line:
            raise ConnectionFailed("server closed the connection")
        response = json.loads(line)
        if "error" in response:
            code = response["error"].get("code", "internal")
            message = response["error"].get("message", "")
            raise _ERROR_TYPES.get(code, RemoteServerError)(code, message)
        return response

    # -- episodic API --------------------------------------------------------

    def reset(self, seed=None):
        payload = {"cmd": "reset"}
        if seed is not None:
            payload["seed"] = int(seed)
        response = self._request(payload)
        return np.asarray(response["obs"], dtype=float)

    def step(self, action):
        action = [float(a) for a in np.asarray(action, dtype=float).ravel()]
        response = self._request({"cmd": "step", "action": action})
        return (
            np.asarray(response["obs"], dtype=float),
            response["reward"],
            response["terminated"],
            response["truncated"],
            response["info"],
        )

    def close(self):
        if self._closed:
            return
        try:
            self._request({"cmd": "close"})
        except ClientError:
            pass
        finally:
            self._closed = True
            self._sock.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def connect(host, port, timeout=10.0,
            expect_obs_dim=EXPECTED_OBS_DIM, expect_action_dim=EXPECTED_ACTION_DIM):
    """Open a connection, exchange the spec, and validate dimensions."""
    try:
        sock = socket.create_connection((host, int(port)), timeout=timeout)
    except OSError as exc:
        raise ConnectionFailed(f"cannot reach {host}:{port}: {exc}") from exc
    env = RemoteEnv(sock, {"obs_dim": 0, "action_dim": 0, "dt": None, "horizon": None})
    spec = env._request({"cmd": "spec"})["spec"]
    if spec["obs_dim"] != expect_obs_dim or spec["action_dim"] != expect_action_dim:
        sock.close()
        raise SpecMismatchError(
            f"server reports obs_dim={spec['obs_dim']}, action_dim={spec['action_dim']}; "
            f"expected {expect_obs_dim}/{expect_action_dim}"
        )
    env.spec = spec
    env.obs_dim = int(spec["obs_dim"])
    env.action_dim = int(spec["action_dim"])
    env.dt = spec["dt"]
    env.horizon = spec["horizon"]
    return env
