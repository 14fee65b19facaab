"""Newline-delimited JSON front end to the proof environment.

Each request line is one JSON object with an ``op``; each produces exactly
one response line echoing the request ``id``. Errors never close the
connection.
"""

from __future__ import annotations

import itertools
import json
import socketserver
import sys
import threading
from typing import IO, Optional

from .axioms import AxiomId, Direction, Mode
from .dataset import from_record, to_record
from .env import Action, EnvConfig, ProofEnv, observe
from .errors import IntError
from .expr import NodePath
from .generator import GeneratorConfig, generate

PROTOCOL_VERSION = 1


class RequestError(Exception):
    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


def parse_action(obj: dict) -> Action:
    try:
        direction = obj.get("direction")
        return Action(
            AxiomId.parse(obj["axiom"]),
            tuple(NodePath.parse(p) for p in obj.get("args", ())),
            Direction(direction) if direction else None,
            Mode(obj.get("mode") or "forward"),
        )
    except (KeyError, TypeError, ValueError, IntError) as err:
        raise RequestError("BAD_ACTION", f"malformed action: {err}") from None


class _Session:
    def __init__(self, env: ProofEnv):
        self.env = env
        self.lock = threading.Lock()
        self.last: Optional[dict] = None


class Server:
    """Session table plus request dispatch; safe to share between threads."""

    def __init__(self, env_config: EnvConfig = EnvConfig()):
        self.env_config = env_config
        self._sessions: dict[str, _Session] = {}
        self._lock = threading.Lock()
        self._ids = itertools.count(1)

    def handle_line(self, line: str) -> str:
        try:
            request = json.loads(line)
            if not isinstance(request, dict):
                raise ValueError("request must be a JSON object")
        except ValueError as err:
            return json.dumps(self._error(None, "BAD_JSON", str(err)))
        return json.dumps(self.handle(request))

    def handle(self, request: dict) -> dict:
        rid = request.get("id")
        op = request.get("op")
        try:
            method = getattr(self, f"_op_{op}", None) if isinstance(op, str) else None
            if method is None:
                raise RequestError("UNKNOWN_OP", f"unknown op {op!r}")
            body = method(request)
        except RequestError as err:
            return self._error(rid, err.code, str(err))
        except IntError as err:
            return self._error(rid, err.code, str(err))
        except (KeyError, TypeError, ValueError) as err:
            return self._error(rid, "BAD_REQUEST", f"{type(err).__name__}: {err}")
        return {"v": PROTOCOL_VERSION, "id": rid, **body}

    @staticmethod
    def _error(rid, code: str, message: str) -> dict:
        return {"v": PROTOCOL_VERSION, "id": rid, "error": {"code": code, "message": message}}

    def _session(self, request: dict) -> tuple[str, _Session]:
        sid = request.get("session")
        with self._lock:
            session = self._sessions.get(sid)
        if session is None:
            raise RequestError("SESSION_NOT_FOUND", f"no session {sid!r}")
        return sid, session

    # ---------------------------------------------------------------- ops

    def _op_generate(self, request: dict) -> dict:
        fields = {k: request[k] for k in ("axiom_set", "k", "l", "degree", "seed") if k in request}
        cfg = GeneratorConfig(**fields)
        start, num = int(request.get("start", 0)), int(request.get("num", 1))
        return {"records": [to_record(generate(cfg, i)) for i in range(start, start + num)]}

    def _op_reset(self, request: dict) -> dict:
        theorem = from_record(request["theorem"])
        cfg = self.env_config
        if "step_limit" in request:
            cfg = EnvConfig(int(request["step_limit"]), cfg.reward_on_success, cfg.reward_otherwise, cfg.axiom_set)
        env = ProofEnv(cfg)
        obs = env.reset(theorem)
        with self._lock:
            sid = f"s{next(self._ids)}"
            self._sessions[sid] = _Session(env)
        return {"session": sid, "observation": obs.to_json(), "reward": env.reward, "done": env.done, "info": {}}

    def _op_step(self, request: dict) -> dict:
        sid, session = self._session(request)
        action = parse_action(request.get("action") or {})
        with session.lock:
            env = session.env
            if env.done:
                # A finished episode keeps reporting its terminal outcome.
                info = {"accepted": False, "reason": "EPISODE_FINISHED", "steps_taken": env.state.steps_taken}
                return {"session": sid, "observation": observe(env.state).to_json(),
                        "reward": env.reward, "done": True, "info": info}
            obs, reward, done, info = env.step(action)
        return {"session": sid, "observation": obs.to_json(), "reward": reward, "done": done, "info": info}

    def _op_action_space_size(self, request: dict) -> dict:
        sid, session = self._session(request)
        with session.lock:
            return {"session": sid, "action_space_size": session.env.action_space_size()}

    def _op_close(self, request: dict) -> dict:
        sid, _ = self._session(request)
        with self._lock:
            self._sessions.pop(sid, None)
        return {"session": sid, "closed": True}

    # ---------------------------------------------------------------- transports

    def serve_stream(self, reader: IO[str], writer: IO[str]) -> None:
        for line in reader:
            if not line.strip():
                continue
            writer.write(self.handle_line(line) + "\n")
            writer.flush()


def serve_stdio(server: Optional[Server] = None) -> None:
    (server or Server()).serve_stream(sys.stdin, sys.stdout)


class _Handler(socketserver.StreamRequestHandler):
    def handle(self):
        for raw in self.rfile:
            line = raw.decode("utf-8", errors="replace")
            if not line.strip():
                continue
            self.wfile.write((self.server.app.handle_line(line) + "\n").encode())
            self.wfile.flush()


class TcpServer(socketserver.ThreadingTCPServer):
    daemon_threads = True
    allow_reuse_address = True

    def __init__(self, address: tuple[str, int], app: Optional[Server] = None):
        super().__init__(address, _Handler)
        self.app = app or Server()


def serve_tcp(host: str = "127.0.0.1", port: int = 7878, app: Optional[Server] = None) -> None:
    with TcpServer((host, port), app) as srv:
        srv.serve_forever()
