import io
import json
import socket
import threading

import pytest

from intkit.dataset import to_record
from intkit.generator import GeneratorConfig, generate
from intkit.server import Server, TcpServer


def _theorem(i=0):
    return generate(GeneratorConfig(k=3, l=5, seed=4), i)


def _call(server, **request):
    return json.loads(server.handle_line(json.dumps(request)))


def _replay(server, record, rid=0):
    reset = _call(server, op="reset", id=rid, theorem=record)
    sid = reset["session"]
    last = reset
    for step in record["proof"]:
        last = _call(server, op="step", id=rid, session=sid, action=step)
    return sid, last


def test_ground_truth_replay_finishes_with_reward():
    server = Server()
    record = to_record(_theorem())
    sid, last = _replay(server, record, rid="r1")
    assert last["v"] == 1 and last["id"] == "r1" and last["session"] == sid
    assert last["done"] is True and last["reward"] == 1.0
    assert set(last["observation"]) == {"seq", "graph"}


def test_stalled_session_ends_at_step_limit():
    server = Server()
    sid = _call(server, op="reset", id=1, theorem=to_record(_theorem()))["session"]
    bad = {"axiom": "AZ", "args": ["goal[0].lhs/"], "direction": "forward"}
    for i in range(1, 16):
        r = _call(server, op="step", id=i, session=sid, action=bad)
        assert r["reward"] == 0.0 and r["done"] == (i == 15)
        assert r["info"]["accepted"] is False
    r = _call(server, op="step", id=16, session=sid, action=bad)
    assert r["done"] is True and r["reward"] == 0.0 and r["info"]["reason"] == "EPISODE_FINISHED"


def test_error_responses():
    server = Server()
    assert json.loads(server.handle_line("{nope"))["error"]["code"] == "BAD_JSON"
    assert json.loads(server.handle_line("[1]"))["error"]["code"] == "BAD_JSON"
    assert _call(server, op="step", id=3, session="s99", action={})["error"]["code"] == "SESSION_NOT_FOUND"
    assert _call(server, op="fly", id=4)["error"]["code"] == "UNKNOWN_OP"
    assert _call(server, op="reset", id=5)["error"]["code"] == "BAD_REQUEST"
    sid = _call(server, op="reset", id=6, theorem=to_record(_theorem()))["session"]
    r = _call(server, op="step", id=7, session=sid, action={"axiom": "XYZ", "args": []})
    assert r["id"] == 7 and r["error"]["code"] == "BAD_ACTION"
    r = _call(server, op="step", id=7, session=sid, action={"axiom": "AC", "args": ["goal0"]})
    assert r["error"]["code"] == "BAD_ACTION"
    r = _call(server, op="step", id=8, session=sid, action={"args": []})
    assert r["error"]["code"] == "BAD_ACTION"
    assert _call(server, op="generate", id=9, k=5, l=3)["error"]["code"] == "INFEASIBLE_ORDER"


def test_generate_action_space_and_close():
    server = Server()
    r = _call(server, op="generate", id=1, k=2, l=3, seed=5, num=3)
    assert len(r["records"]) == 3 and all(rec["l"] == 3 for rec in r["records"])
    sid = _call(server, op="reset", id=2, theorem=r["records"][0])["session"]
    size = _call(server, op="action_space_size", id=3, session=sid)["action_space_size"]
    assert size > 0 and size % 18 == 0
    assert _call(server, op="close", id=4, session=sid)["closed"] is True
    assert _call(server, op="close", id=5, session=sid)["error"]["code"] == "SESSION_NOT_FOUND"


def test_sessions_are_isolated():
    """Interleaved steps on two sessions match two sequential replays."""
    records = [to_record(_theorem(i)) for i in range(2)]
    sequential = Server()
    expected = [_replay(sequential, rec)[1]["reward"] for rec in records]
    server = Server()
    sids = [_call(server, op="reset", id=0, theorem=rec)["session"] for rec in records]
    outcomes = [None, None]
    for step_index in range(5):
        for j, rec in enumerate(records):
            outcomes[j] = _call(server, op="step", id=0, session=sids[j], action=rec["proof"][step_index])
    assert [o["reward"] for o in outcomes] == expected == [1.0, 1.0]


def test_stdio_stream():
    server = Server()
    lines = [json.dumps({"op": "reset", "id": 1, "theorem": to_record(_theorem())}), "", "garbage"]
    out = io.StringIO()
    server.serve_stream(io.StringIO("\n".join(lines) + "\n"), out)
    replies = [json.loads(x) for x in out.getvalue().splitlines()]
    assert len(replies) == 2 and replies[0]["session"] == "s1"
    assert replies[1]["error"]["code"] == "BAD_JSON"


@pytest.fixture
def tcp_server():
    srv = TcpServer(("127.0.0.1", 0))
    thread = threading.Thread(target=srv.serve_forever, daemon=True)
    thread.start()
    yield srv
    srv.shutdown()
    srv.server_close()


def _tcp_replay(port, record, results, key):
    with socket.create_connection(("127.0.0.1", port)) as conn:
        f = conn.makefile("rw", encoding="utf-8")

        def call(obj):
            f.write(json.dumps(obj) + "\n")
            f.flush()
            return json.loads(f.readline())

        assert "error" in call({"op": "nope"})  # the connection survives errors
        sid = call({"op": "reset", "id": key, "theorem": record})["session"]
        last = None
        for step in record["proof"]:
            last = call({"op": "step", "id": key, "session": sid, "action": step})
        results[key] = last


def test_tcp_concurrent_sessions(tcp_server):
    port = tcp_server.server_address[1]
    records = [to_record(_theorem(i)) for i in range(4)]
    results: dict = {}
    threads = [threading.Thread(target=_tcp_replay, args=(port, rec, results, i)) for i, rec in enumerate(records)]
    for t in threads:
        t.start()
    for t in threads:
        t.join(30)
    assert sorted(results) == [0, 1, 2, 3]
    assert all(r["done"] and r["reward"] == 1.0 and r["id"] == i for i, r in results.items())
