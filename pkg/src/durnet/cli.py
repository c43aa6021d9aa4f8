"""Command-line entry point: net simulation, game checking, the Minsky
reduction pipeline, reachability, and interactive play over stdio or HTTP.

Exit codes: 0 success (including NotReachable/Unknown verdicts), 1 usage,
2 parse error in an input file, 3 resource limit hit.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .game import (
    GamePosition,
    ResourceBudgetExceeded,
    solve_bounded,
    verdict_json,
)
from .minsky import Halted, compile_machine, run_machine
from .net import Semantics, enabled, fire
from .reachability import (
    Found,
    NotReachable,
    SearchLimit,
    reach_durational,
    reach_untimed_bounded,
)
from .session import Session, encode, replay_transcript, session_from_config
from .textio import (
    ParseError,
    parse_machine,
    parse_marking,
    parse_multiset,
    parse_net,
    parse_transcript,
    render_net,
    transcript_line,
)

USAGE_EXIT, PARSE_EXIT, RESOURCE_EXIT = 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(USAGE_EXIT)


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as handle:
        return handle.read()


def _load_net(args):
    if getattr(args, "machine", None):
        return compile_machine(parse_machine(_read(args.machine), args.machine))
    return parse_net(_read(args.net), args.net)


def _net_of(source):
    return source.net if hasattr(source, "net") else source


def _emit(payload) -> None:
    print(json.dumps(payload))


def cmd_enabled(args) -> int:
    net = _net_of(_load_net(args))
    sem = Semantics.parse(args.sem)
    marking = parse_marking(args.marking)
    for inst in enabled(net, sem, marking):
        _emit({
            "rule": inst.rule.id,
            "action": inst.action,
            "time": inst.time_label,
            "consumed": str(inst.submarking),
            "successor": str(inst.successor),
        })
    return 0


def cmd_simulate(args) -> int:
    source = _load_net(args)
    net = _net_of(source)
    sem = Semantics.parse(args.sem)
    out = open(args.out, "w", encoding="utf-8") if args.out else sys.stdout

    try:
        if args.replay:
            records = parse_transcript(_read(args.replay))
            if args.left:
                left = parse_marking(args.left)
                right = parse_marking(args.right) if args.right else None
                final = replay_transcript(net, sem, records, left, right)
                if right is None:
                    _emit({"final": str(final)})
                else:
                    _emit({"final_left": str(final.left),
                           "final_right": str(final.right)})
            else:
                marking = parse_marking(args.marking)
                final = replay_transcript(net, sem, records, marking)
                _emit({"final": str(final)})
            return 0

        marking = parse_marking(args.marking)
        rng = random.Random(args.seed)
        for _ in range(args.steps):
            options = enabled(net, sem, marking)
            if not options:
                break
            inst = options[rng.randrange(len(options))]
            marking = fire(marking, inst)
            print(transcript_line("left", inst.action, inst.time_label,
                                  inst.rule.id, marking), file=out)
        return 0
    finally:
        if args.out:
            out.close()


def cmd_check(args) -> int:
    net = _net_of(_load_net(args))
    sem = Semantics.parse(args.sem)
    pos = GamePosition(parse_marking(args.left), parse_marking(args.right))
    verdict = solve_bounded(net, sem, pos, args.depth,
                            max_positions=args.max_positions,
                            swap_collapse=args.swap_collapse)
    _emit(verdict_json(verdict))
    return 0


def cmd_compile_minsky(args) -> int:
    compiled = compile_machine(parse_machine(_read(args.machine), args.machine))
    text = render_net(compiled.net)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)
    sidecar_path = args.sidecar or (
        f"{args.output}.sidecar.json" if args.output else None)
    if sidecar_path:
        with open(sidecar_path, "w", encoding="utf-8") as handle:
            json.dump(compiled.sidecar(), handle, ensure_ascii=False, indent=2)
            handle.write("\n")
    return 0


def cmd_run_machine(args) -> int:
    machine = parse_machine(_read(args.machine), args.machine)
    result = run_machine(machine, args.fuel)
    config = result.config
    payload = {
        "status": "halted" if isinstance(result, Halted) else "out_of_fuel",
        "pc": config.pc, "c0": config.c0, "c1": config.c1,
    }
    if isinstance(result, Halted):
        payload["steps"] = result.steps
    _emit(payload)
    return 0


def cmd_reach(args) -> int:
    net = _net_of(_load_net(args))
    sem = Semantics.parse(args.sem)
    source = parse_marking(args.source)
    if args.target is not None:
        result = reach_durational(net, sem, source, parse_marking(args.target),
                                  max_markings=args.budget)
    else:
        result = reach_untimed_bounded(net, sem, source,
                                       parse_multiset(args.untimed_target),
                                       args.budget)
    if isinstance(result, Found):
        _emit({"result": "found", "length": len(result.path)})
        marking = source
        for inst in result.path:
            marking = fire(marking, inst)
            print(transcript_line("left", inst.action, inst.time_label,
                                  inst.rule.id, marking))
    elif isinstance(result, NotReachable):
        _emit({"result": "not_reachable"})
    else:
        _emit({"result": "not_within_budget", "explored": result.explored})
    return 0


# ---------------------------------------------------------------------------
# play: one protocol, two transports
# ---------------------------------------------------------------------------

def _session_defaults(args) -> dict:
    defaults = {
        "sem": args.sem,
        "as": getattr(args, "role", None) or "spoiler",
        "engine": args.engine,
        "depth": args.depth,
        "seed": args.seed,
        "left": args.left,
        "right": args.right,
    }
    if args.machine:
        defaults["machine_text"] = _read(args.machine)
    if args.net:
        defaults["net_text"] = _read(args.net)
    return defaults


def cmd_play(args) -> int:
    defaults = _session_defaults(args)
    if args.serve:
        return _serve(args.serve, defaults)
    session = session_from_config({}, defaults=defaults)
    print(encode(session.state_message()), flush=True)
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        try:
            request = json.loads(line)
        except json.JSONDecodeError as exc:
            print(encode({"type": "error", "message": f"bad JSON: {exc}"}),
                  flush=True)
            continue
        reply = session.handle(request)
        print(encode(reply), flush=True)
        if args.transcript and reply.get("type") in ("state", "result"):
            _write_transcript(args.transcript, session)
    return 0


def _write_transcript(path: str, session: Session) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for record in session.snap.transcript:
            handle.write(json.dumps(record) + "\n")


def _serve(address: str, defaults: dict) -> int:
    host, _, port = address.rpartition(":")
    host = host or "127.0.0.1"
    sessions: dict[str, Session] = {}
    locks: dict[str, threading.Lock] = {}
    registry_lock = threading.Lock()
    counter = iter(range(1, 10 ** 9))

    class Handler(BaseHTTPRequestHandler):
        def _reply(self, status: int, payload: dict) -> None:
            body = json.dumps(payload).encode()
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(body)))
            self.send_header("Access-Control-Allow-Origin", "*")
            self.send_header("Access-Control-Allow-Headers", "Content-Type")
            self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
            self.end_headers()
            self.wfile.write(body)

        def _body(self) -> dict:
            length = int(self.headers.get("Content-Length") or 0)
            raw = self.rfile.read(length) if length else b"{}"
            return json.loads(raw or b"{}")

        def do_OPTIONS(self):  # noqa: N802 (stdlib handler naming)
            self._reply(200, {})

        def do_GET(self):  # noqa: N802
            session = sessions.get(self.path.rsplit("/", 1)[-1])
            if self.path == "/" or session is None:
                self._reply(404 if self.path != "/" else 200,
                            {"type": "error", "message": "unknown session"}
                            if self.path != "/" else {"service": "durnet",
                                                      "sessions": len(sessions)})
                return
            with locks[session.session_id]:
                self._reply(200, session.state_message())

        def do_POST(self):  # noqa: N802
            try:
                body = self._body()
            except (json.JSONDecodeError, ValueError) as exc:
                self._reply(400, {"type": "error", "message": f"bad JSON: {exc}"})
                return
            if self.path == "/sessions":
                try:
                    with registry_lock:
                        session_id = f"s{next(counter)}"
                        session = session_from_config(
                            body, defaults=defaults, session_id=session_id)
                        sessions[session_id] = session
                        locks[session_id] = threading.Lock()
                    self._reply(200, session.state_message())
                except (ParseError, ValueError) as exc:
                    self._reply(400, {"type": "error", "message": str(exc)})
                return
            session = sessions.get(self.path.rsplit("/", 1)[-1])
            if session is None:
                self._reply(404, {"type": "error", "message": "unknown session"})
                return
            with locks[session.session_id]:
                self._reply(200, session.handle(body))

        def log_message(self, *_args):
            pass

    server = ThreadingHTTPServer((host, int(port)), Handler)
    print(json.dumps({"serving": f"{host}:{server.server_address[1]}"}), flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="durnet",
                     description="durational Petri net workbench")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, **kwargs):
        p = sub.add_parser(name, **kwargs)
        p.set_defaults(func=func)
        return p

    def net_source(p, require=True):
        p.add_argument("--net", help="net definition file")
        p.add_argument("--machine", help="machine file, compiled on the fly")

    p = add("enabled", cmd_enabled, help="list fireable instances of a marking")
    net_source(p)
    p.add_argument("--sem", required=True, choices=["gp", "gi", "lp", "li"])
    p.add_argument("--marking", required=True)

    p = add("simulate", cmd_simulate,
            help="random execution or transcript replay")
    net_source(p)
    p.add_argument("--sem", required=True, choices=["gp", "gi", "lp", "li"])
    p.add_argument("--marking", help="start marking (random/single-sided mode)")
    p.add_argument("--left", help="left marking for two-sided replay")
    p.add_argument("--right", help="right marking for two-sided replay")
    p.add_argument("--steps", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--replay", help="transcript file to re-apply")
    p.add_argument("--out", help="write transcript lines here instead of stdout")

    p = add("check", cmd_check, help="bounded performance-equivalence game")
    net_source(p)
    p.add_argument("--sem", required=True, choices=["gp", "gi", "lp", "li"])
    p.add_argument("--depth", type=int, default=8)
    p.add_argument("--left", required=True)
    p.add_argument("--right", required=True)
    p.add_argument("--max-positions", type=int, default=10 ** 6)
    p.add_argument("--swap-collapse", action="store_true")

    p = add("compile-minsky", cmd_compile_minsky,
            help="compile a counter machine to its reduction net")
    p.add_argument("machine")
    p.add_argument("-o", "--output", help="net file (stdout when omitted)")
    p.add_argument("--sidecar", help="display-name mapping JSON path")

    p = add("run-machine", cmd_run_machine, help="run a counter machine")
    p.add_argument("machine")
    p.add_argument("--fuel", type=int, default=10 ** 6)

    p = add("reach", cmd_reach, help="reachability queries")
    net_source(p)
    p.add_argument("--sem", required=True, choices=["gp", "gi", "lp", "li"])
    p.add_argument("--source", required=True)
    p.add_argument("--target", help="durational target marking")
    p.add_argument("--untimed-target", help="untimed target multiset")
    p.add_argument("--budget", type=int, default=100000)

    p = add("play", cmd_play, help="interactive game over stdio or HTTP")
    net_source(p)
    p.add_argument("--sem", default="gi", choices=["gp", "gi", "lp", "li"])
    p.add_argument("--left")
    p.add_argument("--right")
    p.add_argument("--as", dest="role", choices=["spoiler", "duplicator"],
                   default="spoiler")
    p.add_argument("--engine", choices=["strategy", "search", "manual"])
    p.add_argument("--depth", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--serve", metavar="HOST:PORT",
                   help="serve the protocol over HTTP instead of stdio")
    p.add_argument("--transcript", help="write the play transcript here")

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "reach" and bool(args.target) == bool(args.untimed_target):
            parser.error("reach needs exactly one of --target/--untimed-target")
        if args.command in ("enabled", "simulate", "check", "reach", "play") \
                and not (args.net or args.machine):
            parser.error(f"{args.command} needs --net or --machine")
        if args.command == "simulate" and not args.marking and not args.left:
            parser.error("simulate needs --marking (or --left with --replay)")
        return args.func(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return PARSE_EXIT
    except (ResourceBudgetExceeded, SearchLimit) as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return RESOURCE_EXIT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_EXIT


if __name__ == "__main__":
    sys.exit(main())
