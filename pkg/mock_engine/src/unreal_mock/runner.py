"""Execute a scene script against the mock API and dump the scene graph.

Invocation: mock-runner <script.py> --manifest <paths.txt> --dump <out.json>
Exit 0 means the script ran without raising; any exception (including API
misuse and unknown assets) is recorded in the dump's api_errors and turns
into a nonzero exit. An optional --diff <plan.json> additionally compares the
resulting scene graph against the plan sidecar.
"""

from __future__ import annotations

import argparse
import json
import sys
import traceback
from pathlib import Path

from .api import Recorder, build_unreal_module
from .diffing import diff


class ScriptError(Exception):
    """The script raised during execution; carries the traceback text."""


def read_manifest(path: str | Path) -> frozenset[str]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    return frozenset(line.strip() for line in lines if line.strip())


def dump_from_recorder(recorder: Recorder, exit_status: int) -> dict:
    return {
        "actors": [
            {
                "asset_path": a.asset_path,
                "location": [a.location[0], a.location[1], a.location[2]],
                "yaw_deg": a.yaw_deg,
                "scale": a.scale,
            }
            for a in recorder.actors
        ],
        "load_calls": list(recorder.load_calls),
        "api_errors": list(recorder.api_errors),
        "exit_status": exit_status,
    }


def execute(script_path: str | Path, manifest: frozenset[str]) -> dict:
    """Run the script with a fresh mock module; return the scene graph dump."""
    source = Path(script_path).read_text(encoding="utf-8")
    recorder = Recorder()
    module = build_unreal_module(recorder, manifest)
    saved = sys.modules.get("unreal")
    sys.modules["unreal"] = module
    status = 0
    try:
        code = compile(source, str(script_path), "exec")
        exec(code, {"__name__": "__main__", "__file__": str(script_path)})  # noqa: S102
    except BaseException as exc:  # noqa: BLE001 -- every failure must land in the dump
        status = 1
        recorder.api_errors.append({
            "type": type(exc).__name__,
            "message": str(exc),
            "traceback": traceback.format_exc(),
        })
    finally:
        if saved is not None:
            sys.modules["unreal"] = saved
        else:
            sys.modules.pop("unreal", None)
    return dump_from_recorder(recorder, status)


def write_dump(dump: dict, path: str | Path) -> None:
    Path(path).write_text(json.dumps(dump, indent=1, sort_keys=True) + "\n", encoding="utf-8")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="mock-runner", description=__doc__)
    parser.add_argument("script", help="scene script to execute")
    parser.add_argument("--manifest", required=True, help="text file of valid asset paths")
    parser.add_argument("--dump", required=True, help="where to write the scene graph JSON")
    parser.add_argument("--diff", help="plan sidecar to compare the scene graph against")
    args = parser.parse_args(argv)

    try:
        manifest = read_manifest(args.manifest)
    except OSError as exc:
        print(f"cannot read manifest: {exc}", file=sys.stderr)
        return 2

    dump = execute(args.script, manifest)
    write_dump(dump, args.dump)
    if dump["exit_status"] != 0:
        error = dump["api_errors"][-1]
        print(f"execution failed: {error['type']}: {error['message']}", file=sys.stderr)
        return 1
    print(f"executed cleanly: {len(dump['actors'])} actor(s), "
          f"{len(dump['load_calls'])} load call(s)")

    if args.diff:
        try:
            plan = json.loads(Path(args.diff).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            print(f"cannot read plan: {exc}", file=sys.stderr)
            return 2
        ok, mismatches = diff(dump, plan)
        if not ok:
            for line in mismatches[:20]:
                print(f"diff: {line}", file=sys.stderr)
            print(f"scene graph does not match the plan ({len(mismatches)} mismatch(es))",
                  file=sys.stderr)
            return 1
        print("scene graph matches the plan")
    return 0


if __name__ == "__main__":
    sys.exit(main())
