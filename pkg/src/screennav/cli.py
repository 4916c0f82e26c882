"""Command-line entry points.

Batch commands (gen, variant, synth, eval-*, train-tabular, score,
export-transcripts) operate on bundle directories locally; serve hosts the
HTTP session protocol; play is an interactive single-episode debugger that
can drive either a local bundle or a running server.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import List, Optional

from .agents import (
    MemorizerAgent,
    OracleAgent,
    PolicyTable,
    RandomAgent,
    TabularAgent,
    tabular_train,
)
from .compositor import BranchingSpec, build_environment, load_bundle, save_bundle
from .episode import Episode, TaskSpec
from .errors import ScreenNavError
from .evaluate import eval_interactive, eval_static, render_report, write_report
from .graph import ROOT, SplitRole, page_label
from .rewards import composite_reward
from .splits import default_assignment, edge_instances, export_splits, path_instances
from .tasks import (
    enumerate_tasks,
    read_dataset,
    step_instance_from_record,
    synth_step_instances,
)
from .variants import VariantSpec, apply_variant

DEFAULT_BRANCHING = "5,3,2,2,1,1,0"


def _load_env(args):
    return load_bundle(args.env_dir)


def _make_agent(name: str, env, seed: int, table_path: Optional[str] = None, instances=None):
    if name == "oracle":
        return OracleAgent(env)
    if name == "random":
        return RandomAgent(env, seed=seed)
    if name == "memorizer":
        if instances is None:
            assignment = default_assignment(env)
            instances = edge_instances(env, assignment, seed) + path_instances(
                env, assignment, SplitRole.SFT, seed
            )
        return MemorizerAgent(env, instances, seed=seed)
    if name == "tabular":
        if not table_path:
            raise SystemExit("--table is required for the tabular agent")
        return TabularAgent(env, PolicyTable.load(table_path), seed=seed)
    raise SystemExit(f"unknown agent {name!r}")


def _test_tasks(env, seed: int):
    assignment = default_assignment(env)
    sets = assignment.subtree_node_sets(SplitRole.TEST, env.graph)
    tasks = []
    for nodes in sets:
        tasks.extend(enumerate_tasks(env, set(nodes) | {ROOT}))
    return tasks


def cmd_gen(args) -> int:
    spec = BranchingSpec.parse(args.branching)
    bundle = build_environment(spec, args.seed, name_style=args.name_style)
    save_bundle(bundle, args.out)
    print(f"wrote bundle: {len(bundle.graph)} screens, {len(bundle.assets)} assets -> {args.out}")
    return 0


def cmd_variant(args) -> int:
    base = _load_env(args)
    spec = VariantSpec(kind=args.kind, seed=args.seed, noise_count_per_screen=args.noise_count)
    variant = apply_variant(base, spec)
    out = Path(args.out) if args.out else Path(args.env_dir) / "variants" / args.kind
    save_bundle(variant, out)
    print(f"wrote {args.kind} variant -> {out}")
    return 0


def cmd_synth(args) -> int:
    env = _load_env(args)
    only_role = SplitRole(args.split) if args.split else None
    only_kind = args.kind if args.kind != "all" else None
    written = export_splits(
        env,
        args.out,
        multiplicity=args.multiplicity,
        seed=args.seed,
        only_role=only_role,
        only_kind=only_kind,
    )
    for relative, count in sorted(written.items()):
        print(f"{relative}: {count} records")
    return 0


def cmd_eval_static(args) -> int:
    env = _load_env(args)
    if args.dataset:
        _, records = read_dataset(args.dataset)
        instances = [step_instance_from_record(env, r) for r in records]
    else:
        instances = synth_step_instances(env, _test_tasks(env, args.seed), seed=args.seed)
    agent = _make_agent(args.agent, env, args.seed, args.table)
    report = eval_static(instances, agent)
    print(render_report(report), end="")
    if args.out:
        write_report(report, args.out)
    return 0


def cmd_eval_interactive(args) -> int:
    env = _load_env(args)
    if args.tasks:
        _, records = read_dataset(args.tasks)
        from .tasks import task_from_record

        tasks = [task_from_record(r) for r in records]
    else:
        tasks = _test_tasks(env, args.seed)
    agent = _make_agent(args.agent, env, args.seed, args.table)
    report = eval_interactive(
        env,
        tasks,
        agent,
        n=args.n,
        max_rounds=args.max_rounds,
        allow_complete=not args.no_complete,
    )
    print(render_report(report), end="")
    if args.out:
        write_report(report, args.out)
    return 0


def cmd_train_tabular(args) -> int:
    env = _load_env(args)
    tasks = [t for t in _test_tasks(env, args.seed) if t.distance is not None and t.distance <= args.max_bucket]
    table, stats = tabular_train(
        env,
        tasks,
        episodes_per_task=args.episodes,
        alpha=args.alpha,
        gamma=args.gamma,
        epsilon_start=args.eps_start,
        epsilon_end=args.eps_end,
        seed=args.seed,
        max_rounds=args.max_rounds,
        allow_complete=not args.no_complete,
    )
    table.save(args.out)
    rate = 100.0 * stats.successes / stats.episodes if stats.episodes else 0.0
    print(
        f"trained on {len(tasks)} tasks, {stats.episodes} episodes, "
        f"{rate:.2f}% train success, mean length {stats.mean_length:.2f} -> {args.out}"
    )
    return 0


def cmd_score(args) -> int:
    env = _load_env(args)
    _, records = read_dataset(args.instances)
    predictions = Path(args.predictions).read_text(encoding="utf-8").splitlines()
    if len(predictions) != len(records):
        raise SystemExit(
            f"{len(predictions)} predictions for {len(records)} instances"
        )
    lines = ["index\tr_type\tr_coord\tr_intent\tr_format\ttotal"]
    for index, (record, raw) in enumerate(zip(records, predictions)):
        instance = step_instance_from_record(env, record)
        breakdown = composite_reward(raw.replace("\\t", "\t"), instance.reference)
        lines.append(
            f"{index}\t{breakdown.r_type}\t{breakdown.r_coord}"
            f"\t{breakdown.r_intent}\t{breakdown.r_format}\t{breakdown.total}"
        )
    output = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(output, encoding="utf-8")
    else:
        print(output, end="")
    return 0


def cmd_export_transcripts(args) -> int:
    env = _load_env(args)
    agent = OracleAgent(env)
    tasks = _test_tasks(env, args.seed)
    if args.limit:
        tasks = tasks[:: max(1, len(tasks) // args.limit)][: args.limit]
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", encoding="utf-8") as handle:
        for task in tasks:
            episode = Episode(env=env, task=task, max_rounds=args.max_rounds)
            lines: List[str] = []
            while not episode.done:
                text = agent.act(episode.observation())
                lines.append(text)
                result = episode.step_text(text)
            handle.write(
                json.dumps(
                    {
                        "task": {"start": task.start, "goal": task.goal, "distance": task.distance},
                        "lines": lines,
                        "history": list(episode.history),
                        "a2b_reward": result.a2b_reward,
                        "done": episode.done,
                        "success": episode.success,
                    },
                    sort_keys=True,
                )
                + "\n"
            )
    print(f"wrote {len(tasks)} transcripts -> {out}")
    return 0


def cmd_serve(args) -> int:
    from .service import serve

    serve(args.env_dir, host=args.host, port=args.port)
    return 0


def _print_screen_table(env, node) -> None:
    screen = env.screen(node)
    print(f"--- {page_label(node)} ({len(screen.icons)} icons) ---")
    for icon in screen.icons:
        target = page_label(icon.target) if icon.target is not None else "(no-op)"
        cx, cy = icon.bbox.center()
        print(
            f"  {icon.asset.name:<12} {icon.asset.kind.value:<10} "
            f"bbox={icon.bbox.to_list()} center=({cx},{cy}) -> {target}"
        )


def cmd_play(args) -> int:
    start, goal = (int(p) for p in args.task.split(":"))
    if args.server:
        return _play_remote(args, start, goal)
    env = _load_env(args)
    episode = Episode(
        env=env,
        task=TaskSpec(start=start, goal=goal),
        max_rounds=args.max_rounds,
        allow_complete=not args.no_complete,
    )
    print(episode.task.instruction)
    while not episode.done:
        _print_screen_table(env, episode.current)
        try:
            line = input("action> ").strip()
        except EOFError:
            print()
            return 1
        if line in {"quit", "exit"}:
            return 1
        raw = _expand_shorthand(env, episode.current, line)
        result = episode.step_text(raw)
        print(f"  {episode.history[-1]}  (reward={result.a2b_reward}, done={result.done})")
    print("success" if episode.success else "failure")
    return 0


def _expand_shorthand(env, node, line: str):
    """Accept raw grammar lines, `click <name>`, `click <x> <y>`, `complete`."""
    from .episode import COMPLETE_EXPLANATION, click_explanation, compose_output, format_click_action

    if line.startswith("Explain:"):
        return line.replace("\\t", "\t")
    parts = line.split()
    if parts and parts[0] == "complete":
        return compose_output(COMPLETE_EXPLANATION, "complete")
    if len(parts) == 3 and parts[0] == "click" and parts[1].isdigit() and parts[2].isdigit():
        return compose_output(f"click at ({parts[1]},{parts[2]})", format_click_action(int(parts[1]), int(parts[2])))
    if len(parts) == 2 and parts[0] == "click":
        for icon in env.screen(node).icons:
            if icon.asset.name.lower() == parts[1].lower():
                x, y = icon.bbox.center()
                return compose_output(click_explanation(icon.asset.name, node), format_click_action(x, y))
    return line


def _play_remote(args, start: int, goal: int) -> int:
    import httpx

    base = args.server.rstrip("/")
    with httpx.Client(base_url=base, timeout=30.0) as client:
        created = client.post(
            "/session",
            json={
                "start": start,
                "goal": goal,
                "max_rounds": args.max_rounds,
                "allow_complete": not args.no_complete,
            },
        )
        created.raise_for_status()
        payload = created.json()
        session_id = payload["session_id"]
        print(payload["observation"]["instruction"])
        done = False
        while not done:
            try:
                line = input("action> ").strip()
            except EOFError:
                print()
                return 1
            if line in {"quit", "exit"}:
                return 1
            response = client.post(
                f"/session/{session_id}/step", json={"raw_text": line.replace("\\t", "\t")}
            )
            response.raise_for_status()
            body = response.json()
            done = body["done"]
            history = body["observation"]["history"]
            print(f"  {history[-1]}  (reward={body['a2b_reward']}, done={done})")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="screennav", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="build an environment bundle")
    p.add_argument("--branching", default=DEFAULT_BRANCHING)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--name-style", choices=["pseudo", "words"], default="pseudo")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("variant", help="derive a perturbation variant")
    p.add_argument("--env-dir", required=True)
    p.add_argument("--kind", choices=["image", "name", "position", "noise"], required=True)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--noise-count", type=int, default=2)
    p.add_argument("--out")
    p.set_defaults(func=cmd_variant)

    p = sub.add_parser("synth", help="export split datasets")
    p.add_argument("--env-dir", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--split", choices=[r.value for r in SplitRole])
    p.add_argument(
        "--kind",
        choices=["all", "edges", "paths", "captions", "grounding", "interactive"],
        default="all",
    )
    p.add_argument("--multiplicity", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("eval-static", help="score an agent on step instances")
    p.add_argument("--env-dir", required=True)
    p.add_argument("--agent", default="oracle")
    p.add_argument("--dataset", help="paths.jsonl to evaluate (default: test split)")
    p.add_argument("--table", help="policy table for the tabular agent")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_eval_static)

    p = sub.add_parser("eval-interactive", help="roll out tasks and report Pass@N")
    p.add_argument("--env-dir", required=True)
    p.add_argument("--agent", default="oracle")
    p.add_argument("--tasks", help="tasks_interactive.jsonl (default: test split)")
    p.add_argument("--table", help="policy table for the tabular agent")
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--max-rounds", type=int, default=12)
    p.add_argument("--no-complete", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_eval_interactive)

    p = sub.add_parser("train-tabular", help="train the tabular value learner")
    p.add_argument("--env-dir", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--episodes", type=int, default=200)
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--gamma", type=float, default=0.9)
    p.add_argument("--eps-start", type=float, default=1.0)
    p.add_argument("--eps-end", type=float, default=0.05)
    p.add_argument("--max-bucket", type=int, default=3)
    p.add_argument("--max-rounds", type=int, default=12)
    p.add_argument("--no-complete", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_train_tabular)

    p = sub.add_parser("score", help="score prediction lines against instances")
    p.add_argument("--env-dir", required=True)
    p.add_argument("--instances", required=True)
    p.add_argument("--predictions", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("export-transcripts", help="dump oracle episodes for replay")
    p.add_argument("--env-dir", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--limit", type=int, default=0)
    p.add_argument("--max-rounds", type=int, default=12)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_export_transcripts)

    p = sub.add_parser("serve", help="serve the session protocol over HTTP")
    p.add_argument("--env-dir", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8321)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("play", help="interactive single-episode debugger")
    p.add_argument("--env-dir")
    p.add_argument("--server", help="base URL of a running server (thin-client mode)")
    p.add_argument("--task", required=True, help="start:goal node ids, e.g. 0:6")
    p.add_argument("--max-rounds", type=int, default=12)
    p.add_argument("--no-complete", action="store_true")
    p.set_defaults(func=cmd_play)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ScreenNavError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
