import json
import subprocess
import sys
import time
import urllib.request

import pytest

CHEAT_MACHINE = (
    "1: inc c0 goto 2\n"
    "2: jzdec c0 zero 4 else 3\n"
    "3: jzdec c0 zero 4 else 2\n"
    "4: halt\n"
)


class StdioPlay:
    def __init__(self, tmp_path, machine_text, *extra):
        mm = tmp_path / "machine.mm"
        mm.write_text(machine_text)
        self.proc = subprocess.Popen(
            [sys.executable, "-m", "durnet.cli", "play",
             "--machine", str(mm), "--sem", "gi",
             "--as", "spoiler", "--engine", "strategy", *extra],
            stdin=subprocess.PIPE, stdout=subprocess.PIPE, text=True, bufsize=1,
        )
        self.initial = self.read()

    def read(self):
        line = self.proc.stdout.readline()
        assert line, "server closed unexpectedly"
        return json.loads(line)

    def send(self, message):
        self.proc.stdin.write(json.dumps(message) + "\n")
        self.proc.stdin.flush()
        return self.read()

    def move_index(self, state, rule, time_label=None):
        for move in state["moves"]:
            if move["rule"] == rule and (time_label is None
                                         or move["time"] == time_label):
                return move["index"]
        raise AssertionError(f"{rule} not in {state['moves']}")

    def close(self):
        if self.proc.stdin:
            self.proc.stdin.close()
        self.proc.wait(timeout=10)


@pytest.fixture()
def play(tmp_path):
    sessions = []

    def start(machine_text, *extra):
        game = StdioPlay(tmp_path, machine_text, *extra)
        sessions.append(game)
        return game

    yield start
    for game in sessions:
        game.close()


class TestStdioPlay:
    def test_omega_wins_immediately(self, play):
        game = play("1: halt\n")
        state = game.initial
        assert state["type"] == "state"
        assert [m["rule"] for m in state["moves"]] == ["O.1"]
        reply = game.send({"type": "move", "index": 0})
        assert reply["type"] == "result"
        assert reply["result"] == "spoiler_wins"
        assert reply["rounds"] == 1

    def test_undo_restores_prior_state(self, play):
        game = play("1: inc c0 goto 1\n2: halt\n")
        state0 = game.initial
        _state1 = game.send({"type": "move",
                             "index": game.move_index(state0, "I.p.1")})
        restored = game.send({"type": "undo"})
        assert restored == state0

    def test_hint_suggests_the_honest_move(self, play):
        game = play(CHEAT_MACHINE)
        hint = game.send({"type": "hint"})
        assert hint["type"] == "hint"
        assert hint["move"]["rule"] == "I.p.1"

    def test_significant_cheat_reaches_marked_position(self, play):
        game = play(CHEAT_MACHINE)
        state = game.initial
        assert state["annotations"]["cheat_point"] is False
        # honest increment, then fake the zero test at c0 = 1
        state = game.send({"type": "move",
                           "index": game.move_index(state, "I.p.1", 0)})
        assert state["annotations"]["conforming"]
        state = game.send({"type": "move",
                           "index": game.move_index(state, "Z.p.2", 1)})
        assert state["transcript"][-1]["rule"] == "Z.q.2"  # forced response
        state = game.send({"type": "move",
                           "index": game.move_index(state, "TI.0", 1)})
        assert state["annotations"]["cheat_point"] is True
        assert state["annotations"]["shape"] == "conforming"

        # the engine crosses the zero-test answer, equalizing the controls
        state = game.send({"type": "move",
                           "index": game.move_index(state, "ZI.p.2", 2)})
        assert state["transcript"][-1]["rule"] == "ZIII.q.2"
        assert state["annotations"]["shape"] == "z-swap"
        state = game.send({"type": "move",
                           "index": game.move_index(state, "TI.0", 2)})
        assert state["annotations"]["equal"]

        # halting now helps Spoiler not at all: the engine copies the
        # halting rule and the leftover counter pair ticks on forever
        reply = game.send({"type": "move",
                           "index": game.move_index(state, "O.4", 3)})
        assert reply["type"] == "state"
        assert reply["transcript"][-1]["rule"] == "O.4"
        assert reply["position"]["left"] == reply["position"]["right"] == "3@c0a 3@c0b"
        assert [m["rule"] for m in reply["moves"]] == ["TI.0", "TI.0"]

    def test_illegal_index_keeps_session_alive(self, play):
        game = play("1: halt\n")
        error = game.send({"type": "move", "index": 99})
        assert error["type"] == "error"
        state = game.send({"type": "state"})
        assert state["type"] == "state"

    def test_resign(self, play):
        game = play("1: inc c0 goto 1\n2: halt\n")
        reply = game.send({"type": "resign"})
        assert reply["type"] == "result" and reply["result"] == "resigned"
        assert reply["winner"] == "duplicator_wins"


class TestDuplicatorRole:
    def test_engine_moves_first_and_undo_returns_here(self, tmp_path):
        mm = tmp_path / "m.mm"
        mm.write_text("1: inc c0 goto 1\n2: halt\n")
        proc = subprocess.Popen(
            [sys.executable, "-m", "durnet.cli", "play", "--machine", str(mm),
             "--sem", "gi", "--as", "duplicator", "--engine", "strategy"],
            stdin=subprocess.PIPE, stdout=subprocess.PIPE, text=True, bufsize=1)
        try:
            state = json.loads(proc.stdout.readline())
            # the engine Spoiler has already moved; we answer
            assert state["awaiting"] == "response"
            assert state["pending_move"]["rule"] == "I.p.1"
            assert all(m["side"] == "right" for m in state["moves"])
            proc.stdin.write(json.dumps({"type": "response", "index": 0}) + "\n")
            proc.stdin.flush()
            after = json.loads(proc.stdout.readline())
            assert after["round"] == 1 and after["awaiting"] == "response"
            proc.stdin.write(json.dumps({"type": "undo"}) + "\n")
            proc.stdin.flush()
            assert json.loads(proc.stdout.readline()) == state
        finally:
            proc.stdin.close()
            proc.wait(timeout=10)


class TestOtherEngines:
    def test_manual_engine_drives_both_sides(self, tmp_path):
        mm = tmp_path / "m.mm"
        mm.write_text("1: inc c0 goto 1\n2: halt\n")
        proc = subprocess.Popen(
            [sys.executable, "-m", "durnet.cli", "play", "--machine", str(mm),
             "--sem", "gi", "--engine", "manual"],
            stdin=subprocess.PIPE, stdout=subprocess.PIPE, text=True, bufsize=1)
        try:
            state = json.loads(proc.stdout.readline())
            assert state["awaiting"] == "move"
            proc.stdin.write(json.dumps({"type": "move", "index": 0}) + "\n")
            proc.stdin.flush()
            mid = json.loads(proc.stdout.readline())
            assert mid["awaiting"] == "response"
            assert mid["pending_move"] is not None
            proc.stdin.write(json.dumps({"type": "response", "index": 0}) + "\n")
            proc.stdin.flush()
            done = json.loads(proc.stdout.readline())
            assert done["awaiting"] == "move" and done["round"] == 1
        finally:
            proc.stdin.close()
            proc.wait(timeout=10)

    def test_search_engine_on_arbitrary_net(self, tmp_path):
        net = tmp_path / "n.net"
        net.write_text("rule a dur=1 : p -> q\nrule a dur=1 : r -> q\n")
        proc = subprocess.Popen(
            [sys.executable, "-m", "durnet.cli", "play", "--net", str(net),
             "--sem", "li", "--left", "0@p", "--right", "0@r",
             "--as", "spoiler", "--engine", "search", "--depth", "4"],
            stdin=subprocess.PIPE, stdout=subprocess.PIPE, text=True, bufsize=1)
        try:
            state = json.loads(proc.stdout.readline())
            assert state["annotations"] is None  # not global-time impatient
            assert len(state["moves"]) == 2
            proc.stdin.write(json.dumps({"type": "move", "index": 0}) + "\n")
            proc.stdin.flush()
            nxt = json.loads(proc.stdout.readline())
            # both sides deadlock on q, so Spoiler is immediately stuck
            assert nxt["type"] == "result" and nxt["result"] == "duplicator_wins"
            assert nxt["state"]["position"] == {"left": "1@q", "right": "1@q"}
            assert nxt["state"]["round"] == 1
        finally:
            proc.stdin.close()
            proc.wait(timeout=10)


class HttpPlay:
    def __init__(self, tmp_path, machine_text):
        mm = tmp_path / "machine.mm"
        mm.write_text(machine_text)
        self.proc = subprocess.Popen(
            [sys.executable, "-m", "durnet.cli", "play",
             "--machine", str(mm), "--sem", "gi", "--serve", "127.0.0.1:0"],
            stdout=subprocess.PIPE, text=True, bufsize=1,
        )
        banner = json.loads(self.proc.stdout.readline())
        self.base = f"http://{banner['serving']}"

    def post(self, path, payload):
        request = urllib.request.Request(
            self.base + path, data=json.dumps(payload).encode(),
            headers={"Content-Type": "application/json"}, method="POST")
        with urllib.request.urlopen(request, timeout=10) as response:
            self.last_headers = dict(response.headers)
            return json.loads(response.read())

    def get(self, path):
        with urllib.request.urlopen(self.base + path, timeout=10) as response:
            return json.loads(response.read())

    def close(self):
        self.proc.terminate()
        self.proc.wait(timeout=10)


@pytest.fixture()
def http_play(tmp_path):
    servers = []

    def start(machine_text):
        server = HttpPlay(tmp_path, machine_text)
        servers.append(server)
        return server

    yield start
    for server in servers:
        server.close()


class TestHttpPlay:
    def test_full_game_over_http(self, http_play):
        server = http_play("1: halt\n")
        state = server.post("/sessions", {"as": "spoiler", "engine": "strategy"})
        assert state["type"] == "state"
        session = state["session"]
        assert server.last_headers.get("Access-Control-Allow-Origin") == "*"
        reply = server.post(f"/sessions/{session}",
                            {"type": "move", "index": 0})
        assert reply["type"] == "result" and reply["result"] == "spoiler_wins"
        final = server.get(f"/sessions/{session}")
        assert final["result"]["result"] == "spoiler_wins"

    def test_sessions_are_independent(self, http_play):
        server = http_play("1: inc c0 goto 1\n2: halt\n")
        first = server.post("/sessions", {})
        second = server.post("/sessions", {})
        assert first["session"] != second["session"]
        moved = server.post(f"/sessions/{first['session']}",
                            {"type": "move", "index": 0})
        untouched = server.get(f"/sessions/{second['session']}")
        assert moved["round"] == 1 and untouched["round"] == 0

    def test_unknown_session_is_404(self, http_play):
        server = http_play("1: halt\n")
        request = urllib.request.Request(
            server.base + "/sessions/zzz", data=b"{}", method="POST")
        with pytest.raises(urllib.error.HTTPError) as err:
            urllib.request.urlopen(request, timeout=10)
        assert err.value.code == 404

    def test_parallel_sessions_do_not_interfere(self, http_play):
        from concurrent.futures import ThreadPoolExecutor

        server = http_play("1: inc c0 goto 1\n2: halt\n")

        def play_rounds(rounds):
            state = server.post("/sessions", {})
            session = state["session"]
            for _ in range(rounds):
                reply = server.post(f"/sessions/{session}",
                                    {"type": "move", "index": 0})
                assert reply["type"] == "state"
            return session, server.get(f"/sessions/{session}")["round"]

        with ThreadPoolExecutor(max_workers=4) as pool:
            results = list(pool.map(play_rounds, [2, 5, 3, 7]))
        sessions = [session for session, _ in results]
        assert len(set(sessions)) == 4
        assert [rounds for _, rounds in results] == [2, 5, 3, 7]
