"""Thin client for the proxops newline-delimited JSON environment server."""

from .client import (
    ClientError,
    ConnectionFailed,
    RemoteEnv,
    RemoteLifecycleError,
    RemoteProtocolError,
    RemoteServerError,
    SpecMismatchError,
    connect,
)

__all__ = [
    "ClientError",
    "ConnectionFailed",
    "RemoteEnv",
    "RemoteLifecycleError",
    "RemoteProtocolError",
    "RemoteServerError",
    "SpecMismatchError",
    "connect",
]

__version__ = "0.1.0"
