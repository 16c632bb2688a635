import argparse
import logging
import sys
from pathlib import Path
from typing import Callable, List, Optional, Sequence

from rich.console import Console
from rich.logging import RichHandler

from greq.appmodel import AppModelRefused, emit_app_model, serialize_app_model
from greq.document import emit_document
from greq.file_io import GreqIOError, read_text_file, write_text_file
from greq.graph import GraphError, goal_view, render_goal_view
from greq.interchange import INTERCHANGE_SUFFIX, InterchangeError, canonical_deserialize, canonical_serialize
from greq.metrics import compute_metrics, render_metrics_json, render_metrics_text
from greq.mindmap import MapFilter, MindmapFilterError, RENDERERS, emit_mindmap
from greq.model import GreqError, Model
from greq.parser import parse_source
from greq.printer import format_model
from greq.rule_spec import Severity
from greq.source import format_errors
from greq.validate import registered_rules, render_report_json, run_diagnostics

console = Console(stderr=True, highlight=False, emoji=False, soft_wrap=True)
logger = logging.getLogger("greqc")

EXIT_OK = 0
EXIT_FINDINGS = 1
EXIT_USAGE = 2


class SourceRejected(GreqError):
    """The input file does not parse; ``rendered`` holds the positioned error blocks."""

    def __init__(self, path: Path, rendered: str, count: int):
        super().__init__(f"{path}: {count} error(s)")
        self.rendered = rendered


def configure_logging(args: argparse.Namespace) -> None:
    level = logging.WARNING
    if getattr(args, "verbose", False):
        level = logging.DEBUG
    if getattr(args, "quiet", False):
        level = logging.ERROR
    logging.basicConfig(
        level=level,
        format="%(message)s",
        handlers=[RichHandler(console=console, show_path=False, show_time=False)],
        force=True,
    )


def load_model(path: Path) -> Model:
    """Read a ``.greq`` source, or a canonical ``.greq.json`` document."""
    text = read_text_file(path)
    if path.name.endswith(INTERCHANGE_SUFFIX):
        return canonical_deserialize(text)
    result = parse_source(text, str(path))
    if not result.ok:
        raise SourceRejected(path, format_errors(result.errors, text), len(result.errors))
    return result.model


def emit_output(text: str, output: Optional[Path], quiet: bool) -> None:
    if output is None:
        sys.stdout.write(text)
        return
    message = write_text_file(output, text)
    if not quiet:
        console.print(message, style="cyan", markup=False)


def command_check(args: argparse.Namespace) -> int:
    model = load_model(args.file)
    report = run_diagnostics(model)
    if args.json:
        sys.stdout.write(render_report_json(report))
    else:
        for diagnostic in report.diagnostics:
            if diagnostic.severity is Severity.ERROR:
                console.print(diagnostic.render(), style="red", markup=False)
            elif not args.quiet:
                console.print(diagnostic.render(), style="yellow", markup=False)
    if not args.quiet:
        style = "red" if report.has_errors else ("yellow" if report.warnings else "cyan")
        console.print(
            f"{report.model_name}: {len(report.errors)} error(s), {len(report.warnings)} warning(s)",
            style=style,
            markup=False,
        )
    if report.has_errors or (args.strict and report.warnings):
        return EXIT_FINDINGS
    return EXIT_OK


def command_doc(args: argparse.Namespace) -> int:
    model = load_model(args.file)
    emit_output(emit_document(model, run_diagnostics(model)), args.output, args.quiet)
    return EXIT_OK


def command_mindmap(args: argparse.Namespace) -> int:
    model = load_model(args.file)
    if args.agent is not None:
        focus = MapFilter.goals_of_agent(args.agent)
    elif args.focus == "concepts":
        focus = MapFilter.concepts_only()
    elif args.focus == "goals":
        focus = MapFilter.goals_only()
    else:
        focus = MapFilter.full()
    emit_output(emit_mindmap(model, focus, args.format), args.output, args.quiet)
    return EXIT_OK


def command_appmodel(args: argparse.Namespace) -> int:
    model = load_model(args.file)
    try:
        app = emit_app_model(model)
    except AppModelRefused as exc:
        console.print(f"Refusing to derive an application model: {exc}", style="red", markup=False)
        return EXIT_FINDINGS
    emit_output(serialize_app_model(app), args.output, args.quiet)
    return EXIT_OK


def command_metrics(args: argparse.Namespace) -> int:
    model = load_model(args.file)
    metrics = compute_metrics(model, run_diagnostics(model))
    sys.stdout.write(render_metrics_json(metrics) if args.json else render_metrics_text(metrics))
    return EXIT_OK


def command_export(args: argparse.Namespace) -> int:
    emit_output(canonical_serialize(load_model(args.file)), args.output, args.quiet)
    return EXIT_OK


def command_fmt(args: argparse.Namespace) -> int:
    emit_output(format_model(load_model(args.file)), args.output, args.quiet)
    return EXIT_OK


def command_view(args: argparse.Namespace) -> int:
    view = goal_view(load_model(args.file), args.goal)
    sys.stdout.write(f"{view.goal}: {render_goal_view(view)}\n")
    return EXIT_OK


def command_rules(args: argparse.Namespace) -> int:
    for rule in registered_rules():
        listing = rule.as_listing()
        sys.stdout.write(f"{listing['rule_id']} {listing['severity']:<7} {listing['summary']}\n")
    return EXIT_OK


def _verbosity_options(default) -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument(
        "--quiet",
        "-q",
        action="store_true",
        default=default,
        help="Only report errors.",
    )
    parent.add_argument(
        "--verbose",
        "-v",
        action="store_true",
        default=default,
        help="Enable verbose logging.",
    )
    return parent


def _add_command(
    subparsers,
    name: str,
    handler: Callable[[argparse.Namespace], int],
    help_text: str,
    parents: List[argparse.ArgumentParser],
    with_file: bool = True,
    with_output: bool = False,
) -> argparse.ArgumentParser:
    command = subparsers.add_parser(name, help=help_text, description=help_text, parents=parents)
    if with_file:
        command.add_argument("file", type=Path, help="Input .greq source or .greq.json document.")
    if with_output:
        command.add_argument(
            "-o",
            "--output",
            type=Path,
            default=None,
            help="Output file (default: stdout).",
        )
    command.set_defaults(handler=handler)
    return command


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="greqc",
        description="Goal-oriented requirements compiler: check, analyze and transform .greq models.",
        parents=[_verbosity_options(False)],
    )
    subparsers = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    # Repeated on every subcommand so the flags may also follow it.
    parents = [_verbosity_options(argparse.SUPPRESS)]

    check = _add_command(subparsers, "check", command_check, "Parse a model and run the diagnostic rules.", parents)
    check.add_argument("--json", action="store_true", help="Print the structured report on stdout.")
    check.add_argument("--strict", action="store_true", help="Fail on warnings as well as errors.")

    _add_command(subparsers, "doc", command_doc, "Emit the Markdown requirements document.", parents, with_output=True)

    mindmap = _add_command(
        subparsers, "mindmap", command_mindmap, "Emit a concept map for managers.", parents, with_output=True
    )
    mindmap.add_argument("--format", choices=sorted(RENDERERS), default="dot", help="Map format (default: dot).")
    focus = mindmap.add_mutually_exclusive_group()
    focus.add_argument("--focus", choices=["concepts", "goals"], default=None, help="Restrict the map to one axis.")
    focus.add_argument("--agent", default=None, help="Only the goals and privileges of one agent.")

    _add_command(
        subparsers, "appmodel", command_appmodel, "Emit the WebML-style application model.", parents, with_output=True
    )

    metrics = _add_command(subparsers, "metrics", command_metrics, "Print model measures and risk.", parents)
    metrics.add_argument("--json", action="store_true", help="Print the measures as JSON.")

    _add_command(
        subparsers, "export", command_export, "Emit the canonical .greq.json interchange.", parents, with_output=True
    )
    _add_command(subparsers, "fmt", command_fmt, "Pretty-print a model in canonical form.", parents, with_output=True)

    view = _add_command(subparsers, "view", command_view, "Print the partial view of one leaf goal.", parents)
    view.add_argument("--goal", required=True, help="Name of the leaf goal.")

    _add_command(subparsers, "rules", command_rules, "List the registered diagnostic rules.", parents, with_file=False)
    return parser


def run_cli(argv: Optional[Sequence[str]] = None) -> int:
    """Run one ``greqc`` invocation and return its exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse already printed usage (or help) on the right stream.
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    configure_logging(args)
    logger.debug("command %s", args.command)

    try:
        return args.handler(args)
    except SourceRejected as exc:
        console.print(exc.rendered, style="red", markup=False, end="")
        if not args.quiet:
            console.print(str(exc), style="red", markup=False)
        return EXIT_USAGE
    except InterchangeError as exc:
        for issue in exc.issues:
            console.print(f"{args.file}: {issue}", style="red", markup=False)
        return EXIT_USAGE
    except (GreqIOError, GraphError, MindmapFilterError) as exc:
        console.print(str(exc), style="red", markup=False)
        return EXIT_USAGE
    except (GreqError, ValueError) as exc:
        logger.debug("unexpected failure", exc_info=True)
        console.print(f"greqc: {exc}", style="red", markup=False)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
