"""Command-line front end.

Commands: out, subgroups, sections, eval, certify, selftest.
Exit codes: 0 success, 1 input error, 2 limit error, 3 consistency failure.
"""
import argparse
import logging
import os
import sys
from datetime import datetime, timezone
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import List, Optional

from pydantic import BaseModel
from pythonjsonlogger import jsonlogger

from src.config import Config, LimitExceededError
from src.evaluator import ConsistencyError, Evaluator
from src.exactlin import Field, load_module
from src.presets import load_group
from src.schemas import (CertifyReport, EvaluationReport, OrbitRow, OutRepRow, OutReport, SectionsReport,
                         SelftestReport, SubgroupClassRow, SubgroupsReport)
from src.selftest import run_selftest
from src.structure import out_group, subgroup_lattice

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_LIMIT = 2
EXIT_CONSISTENCY = 3


class CustomJsonFormatter(jsonlogger.JsonFormatter):
    def add_fields(self, log_record, record, message_dict):
        super(CustomJsonFormatter, self).add_fields(log_record, record, message_dict)
        log_record['timestamp'] = datetime.now(timezone.utc).isoformat()
        log_record['level'] = record.levelname
        log_record['logger'] = record.name
        log_record['message'] = record.getMessage()


def setup_logging(config: Config) -> None:
    # Console handler keeps stdout free for reports
    console_formatter = logging.Formatter('%(asctime)s [%(levelname)s] %(name)s: %(message)s')
    stream_handler = logging.StreamHandler(sys.stderr)
    stream_handler.setFormatter(console_formatter)
    handlers: List[logging.Handler] = [stream_handler]

    if config.log_file:
        log_path = Path(config.log_file).resolve()
        log_path.parent.mkdir(parents=True, exist_ok=True)
        # 10MB, 5 backups
        file_handler = RotatingFileHandler(str(log_path), maxBytes=10 * 1024 * 1024, backupCount=5)
        file_handler.setFormatter(CustomJsonFormatter())
        handlers.append(file_handler)

    logging.basicConfig(level=config.log_level.upper(), handlers=handlers, force=True)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--field', help="Q or F<p> (default: BISET_FIELD or Q)")
    common.add_argument('--limit', type=int, help="subgroup lattice size limit")
    common.add_argument('--iso-limit', type=int, help="isomorphism search size limit")
    common.add_argument('--verify', action='store_true', default=None,
                        help="run both the rank formula and the closed formula and compare")
    common.add_argument('--json', action='store_true', help="print the JSON report")

    parser = argparse.ArgumentParser(prog='biset', description="Evaluations of simple biset functors")
    commands = parser.add_subparsers(dest='command', required=True)

    cmd = commands.add_parser('out', parents=[common], help="enumerate Out(H)")
    cmd.add_argument('H')

    cmd = commands.add_parser('subgroups', parents=[common], help="conjugacy classes of subgroups")
    cmd.add_argument('G')

    cmd = commands.add_parser('sections', parents=[common], help="section orbits with subquotient H")
    cmd.add_argument('G')
    cmd.add_argument('H')

    for name, text in (('eval', "dimension of S_{H,V}(G)"), ('certify', "fired certificates only")):
        cmd = commands.add_parser(name, parents=[common], help=text)
        cmd.add_argument('G')
        cmd.add_argument('H')
        cmd.add_argument('module', help="trivial, sign, char<j>, or a module spec file")
        if name == 'eval':
            cmd.add_argument('--method', choices=('rank-formula', 'closed-formula'))

    cmd = commands.add_parser('selftest', parents=[common], help="run the self-test catalog")
    cmd.add_argument('--quick', action='store_true', help="skip the order-48 sweep members")
    cmd.add_argument('--stretch', action='store_true', help="include S7 with raised limits")
    return parser


def config_from_args(args: argparse.Namespace) -> Config:
    return Config(field=args.field, lattice_limit=args.limit, iso_limit=args.iso_limit,
                  verify=args.verify, output_format='json' if args.json else None)


def requested_field(args: argparse.Namespace, config: Config) -> Optional[Field]:
    """The field asked for on the command line or in the environment, if any."""
    if args.field is None and 'BISET_FIELD' not in os.environ:
        return None
    return Field(config.characteristic)


# Reports

def out_report(name: str, config: Config) -> OutReport:
    H = load_group(name, config.element_cache_limit)
    out = out_group(H, config.iso_limit)
    return OutReport(
        group=name, group_order=H.order, generators=[str(g) for g in out.generators],
        aut_order=out.aut_order, inner_order=out.inner_order, out_order=out.out_order,
        reps=[OutRepRow(index=i, images=[str(y) for y in images]) for i, images in enumerate(out.out_reps)],
        mult_table=[list(row) for row in out.mult_table],
    )


def subgroups_report(name: str, config: Config) -> SubgroupsReport:
    G = load_group(name, config.element_cache_limit)
    lattice = subgroup_lattice(G, config.lattice_limit)
    rows = []
    for c, (rep, members) in enumerate(lattice.conjugacy_classes):
        K = lattice.all_subgroups[rep]
        rows.append(SubgroupClassRow(index=c, order=K.order, class_size=len(members), normal=len(members) == 1,
                                     generators=[str(g) for g in K.generators]))
    return SubgroupsReport(group=name, group_order=G.order, subgroup_count=len(lattice), classes=rows)


def make_evaluator(g_name: str, h_name: str, config: Config) -> Evaluator:
    G = load_group(g_name, config.element_cache_limit)
    H = load_group(h_name, config.element_cache_limit)
    return Evaluator(G, H, config, group_name=g_name, subquotient_name=h_name)


def sections_report(g_name: str, h_name: str, config: Config) -> SectionsReport:
    ev = make_evaluator(g_name, h_name, config)
    rows = [
        OrbitRow(index=i, t_order=o.rep.T.order, s_order=o.rep.S.order, orbit_size=o.orbit_size,
                 minimal=o.minimal, normalizer_order=o.normalizer.order, gamma_order=len(o.gamma_image),
                 t_generators=[str(g) for g in o.rep.T.generators],
                 s_generators=[str(g) for g in o.rep.S.generators])
        for i, o in enumerate(ev.orbits)
    ]
    return SectionsReport(group=g_name, subquotient=h_name, orbits=rows)


def eval_report(args: argparse.Namespace, config: Config) -> EvaluationReport:
    ev = make_evaluator(args.G, args.H, config)
    module = load_module(args.module, ev.out, requested_field(args, config))
    return ev.evaluate(module, method=args.method)


def certify_report(args: argparse.Namespace, config: Config) -> CertifyReport:
    ev = make_evaluator(args.G, args.H, config)
    module = load_module(args.module, ev.out, requested_field(args, config))
    return CertifyReport(group=args.G, subquotient=args.H, module=module.name, field=module.field.label,
                         certificates=ev.certificates(module))


# Text rendering

def _table(header: List[str], rows: List[List[object]]) -> List[str]:
    cells = [header] + [[str(x) for x in row] for row in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(header))]
    return ['  '.join(x.rjust(w) for x, w in zip(row, widths)).rstrip() for row in cells]


def render_out(r: OutReport) -> List[str]:
    lines = [f"Out({r.group}): order {r.out_order}  (|{r.group}| = {r.group_order}, "
             f"|Aut| = {r.aut_order}, |Inn| = {r.inner_order})",
             f"generators: {' '.join(r.generators) or '-'}"]
    lines += [f"  [{row.index}] {' '.join(row.images) or '-'}" for row in r.reps]
    lines.append("multiplication table:")
    lines += ['  ' + ' '.join(str(x) for x in row) for row in r.mult_table]
    return lines


def render_subgroups(r: SubgroupsReport) -> List[str]:
    lines = [f"{r.group} (order {r.group_order}): {r.subgroup_count} subgroups "
             f"in {len(r.classes)} conjugacy classes"]
    return lines + _table(['class', 'order', 'size', 'normal', 'generators'],
                          [[c.index, c.order, c.class_size, 'yes' if c.normal else 'no',
                            ' '.join(c.generators) or '()'] for c in r.classes])


def render_sections(r: SectionsReport) -> List[str]:
    lines = [f"Sections of {r.group} with subquotient {r.subquotient}: {len(r.orbits)} orbits"]
    if not r.orbits:
        return lines
    return lines + _table(['orbit', '|T|', '|S|', 'size', 'minimal', '|N|', '|Gamma|'],
                          [[o.index, o.t_order, o.s_order, o.orbit_size, 'yes' if o.minimal else 'no',
                            o.normalizer_order, o.gamma_order] for o in r.orbits])


def _render_certificates(certificates) -> List[str]:
    lines = []
    for c in certificates:
        predicted = f", predicts dim {c.predicted_dim}" if c.predicted_dim is not None else ""
        lines.append(f"  ({c.code}) {c.name} [{c.kind}{predicted}]")
    return lines or ["  none fired"]


def render_eval(r: EvaluationReport) -> List[str]:
    status = "vanishes" if r.vanishes else "nonzero"
    lines = [f"dim S_{{{r.subquotient},{r.module}}}({r.group}) over {r.field} = {r.dim}  ({status})",
             f"method: {r.method}  module dim: {r.module_dim}  lower bound: {r.lower_bound}",
             f"rank formula: {'-' if r.rank_formula_dim is None else r.rank_formula_dim}  "
             f"closed formula: {'-' if r.closed_formula_dim is None else r.closed_formula_dim}  "
             f"verified: {'yes' if r.verified else 'no'}"]
    if r.per_orbit_traces:
        lines += _table(['orbit', '|T|', '|S|', 'minimal', 'trace'],
                        [[t.orbit, t.t_order, t.s_order, 'yes' if t.minimal else 'no', t.trace_dim]
                         for t in r.per_orbit_traces])
    lines.append("certificates:")
    lines += _render_certificates(r.certificates)
    lines.append(f"note: {r.notice}")
    return lines


def render_certify(r: CertifyReport) -> List[str]:
    return [f"Certificates for S_{{{r.subquotient},{r.module}}}({r.group}) over {r.field}:"] + \
        _render_certificates(r.certificates)


def render_selftest(r: SelftestReport) -> List[str]:
    lines = _table(['check', 'result', 'seconds', 'detail'],
                   [[x.name, 'pass' if x.passed else 'FAIL', f"{x.seconds:.2f}", x.detail] for x in r.results])
    lines.append(f"{len(r.results) - len(r.failed)}/{len(r.results)} checks passed (field {r.field})")
    return lines


def emit(report: BaseModel, lines: List[str], config: Config) -> None:
    if config.output_format == 'json':
        print(report.model_dump_json(indent=2))
    else:
        print('\n'.join(lines))


def run_command(args: argparse.Namespace, config: Config) -> int:
    if args.command == 'out':
        report = out_report(args.H, config)
        emit(report, render_out(report), config)
    elif args.command == 'subgroups':
        report = subgroups_report(args.G, config)
        emit(report, render_subgroups(report), config)
    elif args.command == 'sections':
        report = sections_report(args.G, args.H, config)
        emit(report, render_sections(report), config)
    elif args.command == 'eval':
        report = eval_report(args, config)
        emit(report, render_eval(report), config)
    elif args.command == 'certify':
        report = certify_report(args, config)
        emit(report, render_certify(report), config)
    elif args.command == 'selftest':
        report = run_selftest(config, quick=args.quick, stretch=args.stretch)
        emit(report, render_selftest(report), config)
        if report.passed:
            return EXIT_OK
        if report.failed_with(ConsistencyError.__name__):
            return EXIT_CONSISTENCY
        if report.failed_with(LimitExceededError.__name__):
            return EXIT_LIMIT
        return EXIT_INPUT
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = config_from_args(args)
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    setup_logging(config)

    try:
        return run_command(args, config)
    except LimitExceededError as e:
        logger.error(f"Limit exceeded: {str(e)}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_LIMIT
    except ConsistencyError as e:
        logger.error(f"Consistency failure: {str(e)}")
        print(f"consistency failure: {e}", file=sys.stderr)
        return EXIT_CONSISTENCY
    except ValueError as e:
        logger.error(f"Invalid input: {str(e)}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
