#!/usr/bin/env python3
"""
Fusion-system verification harness - run scenarios and report verdicts

Can be run as:
1. Command-line tool: python3 app.py <subcommand> [options]
2. Python module: app.run_scenario(...), app.batch(...), app.get_reports_output(...)

A scenario names a catalog group G, a prime p, optionally a p-subgroup P
(default: a Sylow p-subgroup) and a subgroup H with P <= H <= G. The
system is F = F_P(G), the subsystem F_P(H) (F itself when H is omitted).

Supports output formats: JSON (default), CSV, YAML
Exit codes: 0 consistent, 1 theorem-inconsistency found, 2 input error.
"""

import argparse
import csv
import io
import json
import multiprocessing
import os
import sys
import time
from dataclasses import dataclass, field

import pandas as pd
import sympy
import yaml
from box import Box

import catalog
import cohom
import control
import fusion
import gcore
import mylog
import settings

log = mylog.get_logger(__name__, level=os.environ.get('LOGLEVEL', 'WARNING'))

VERSION = '1.0.0'

CHECKS = ('saturation', 'control', 'mislin', 'dims', 'strata', 'remark14', 'transport', 'local', 'probe')

# remark14 compares N_G(E)/C_G(E) with Aut_F(E); weyl is the same check
CHECK_ALIASES = {'weyl': 'remark14'}

EXIT_OK, EXIT_INCONSISTENT, EXIT_INPUT = 0, 1, 2

CSV_COLUMNS = ['scenario_id', 'check', 'verdict', 'detail', 'dims', 'millis']

# at odd p, differing systems show a strict stable inclusion by this degree
STRICT_BY_DEGREE = 4


# ============================================================================
# Scenarios
# ============================================================================


@dataclass
class Scenario:
    id: str
    group: str
    p: int
    subgroup_gens: list = None
    ambient_sub_gens: list = None
    local_gens: list = None
    max_degree: int = None
    checks: list = field(default_factory=lambda: ['saturation'])
    probe: dict = None

    FIELDS = ('id', 'group', 'p', 'subgroup_gens', 'ambient_sub_gens', 'local_gens',
              'max_degree', 'checks', 'probe')

    @classmethod
    def from_dict(cls, entry, path=None, line=None):
        if not isinstance(entry, dict):
            raise catalog.CatalogError("scenario entry must be a mapping", path, line)
        entry = Box(entry)
        unknown = set(entry) - set(cls.FIELDS)
        if unknown:
            raise catalog.CatalogError(f"unknown field(s) {sorted(unknown)}", path, line)
        for key, kind in (('id', str), ('group', str), ('p', int)):
            if not isinstance(entry.get(key), kind) or isinstance(entry.get(key), bool):
                raise catalog.CatalogError(f"expected {kind.__name__}, got {entry.get(key)!r}", path, line, key)
        checks = [CHECK_ALIASES.get(c, c) for c in entry.get('checks') or ['saturation']]
        bad = [c for c in checks if c not in CHECKS]
        if bad:
            raise catalog.CatalogError(f"unknown check(s) {bad}; known: {list(CHECKS)}", path, line, 'checks')
        for key in ('subgroup_gens', 'ambient_sub_gens', 'local_gens'):
            if entry.get(key) is not None and not isinstance(entry[key], list):
                raise catalog.CatalogError("expected a list of generators", path, line, key)
        max_degree = entry.get('max_degree')
        if max_degree is not None and (not isinstance(max_degree, int) or max_degree < 0):
            raise catalog.CatalogError(f"expected a nonnegative integer, got {max_degree!r}", path, line, 'max_degree')
        probe = entry.get('probe')
        if probe is not None and not isinstance(probe, dict):
            raise catalog.CatalogError("expected a mapping with n and rmax", path, line, 'probe')
        return cls(
            id=entry.id,
            group=entry.group,
            p=entry.p,
            subgroup_gens=_plain(entry.get('subgroup_gens')),
            ambient_sub_gens=_plain(entry.get('ambient_sub_gens')),
            local_gens=_plain(entry.get('local_gens')),
            max_degree=max_degree,
            checks=checks,
            probe=_plain(probe),
        )


def _plain(value):
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


def load_scenarios(path=None, text=None):
    """Scenarios from a YAML file with a format: 1 header."""
    if text is None:
        try:
            with open(path) as fd:
                text = fd.read()
        except OSError as e:
            raise catalog.CatalogError(e.strerror or str(e), path=path) from e
    data = catalog.parse_yaml(text, path)
    entries = data.get('scenarios')
    if not isinstance(entries, list):
        raise catalog.CatalogError("'scenarios' must be a list", path=path, field='scenarios')
    lines = catalog.node_lines(text, 'scenarios')
    out, seen = [], set()
    for i, entry in enumerate(entries):
        line = lines[i] if i < len(lines) else None
        s = Scenario.from_dict(entry, path, line)
        if s.id in seen:
            raise catalog.CatalogError(f"duplicate id {s.id!r}", path, line, 'id')
        seen.add(s.id)
        out.append(s)
    return out


def parse_generator(raw, degree):
    """A permutation from an image list or a cycle-notation string."""
    if isinstance(raw, str):
        text = raw.strip()
        if text.startswith('['):
            raw = yaml.safe_load(text)
        else:
            return gcore.Permutation.parse_cycles(text, degree)
    return catalog.parse_images(raw, degree)


def resolve(s, specs):
    """Build G, P, H and the two fusion systems; input errors raise ValueError."""
    named = catalog.by_name(specs)
    if s.group not in named:
        raise ValueError(f"unknown group {s.group!r}")
    spec = named[s.group]
    G = catalog.build_group(spec)
    if not sympy.isprime(s.p):
        raise ValueError(f"{s.p} is not prime")
    if len(G.elements) % s.p:
        log.warning("%s: p = %d does not divide |G| = %d", s.id, s.p, len(G.elements))

    def sub(gens, what):
        perms = [parse_generator(g, spec.degree) for g in gens]
        try:
            return gcore.subgroup_from_gens(G, perms)
        except ValueError as e:
            raise ValueError(f"{what}: {e}") from e

    if s.subgroup_gens:
        P = sub(s.subgroup_gens, 'subgroup_gens')
        if not gcore.is_p_group(P, s.p):
            raise ValueError(f"subgroup_gens generate a group of order {len(P.elements)}, not a {s.p}-group")
    else:
        P = gcore.sylow(G, s.p)
    F = fusion.realized(G, P, s.p, name=f"F_P({G.name})")
    H = None
    Gsys = F
    if s.ambient_sub_gens:
        H = sub(s.ambient_sub_gens, 'ambient_sub_gens')
        if not P.element_set <= H.element_set:
            raise ValueError(f"H = {H.label()} does not contain P = {P.label()}")
        Gsys = fusion.subsystem_from(F, H, name=f"F_P({H.label()})")
    R = sub(s.local_gens, 'local_gens') if s.local_gens else None
    return Box(G=G, P=P, H=H, R=R, F=F, Gsys=Gsys, spec=spec)


# ============================================================================
# Checks
# ============================================================================


def _mislin_row(verdict):
    if not verdict.consistent_with_theorem:
        label = 'inconsistent'
    else:
        label = 'consistent' if verdict.asserted else 'recorded'
    return {
        'verdict': label,
        'detail': f"controls_elem={verdict.controls_elem} systems_equal={verdict.systems_equal}",
        'result': verdict.to_dict(),
    }


def check_saturation(setup, s):
    report = fusion.is_saturated(setup.F)
    failures = report.failures()
    if failures:
        parts = []
        for c in failures:
            missing = 'fully automized' if c.fully_automized is None else 'fully automized receptive'
            parts.append(f"class of {c.representative.label()} has no {missing} member")
        detail = '; '.join(parts)
    else:
        detail = f"{len(report.classes)} F-classes"
    result = report.to_dict()
    if setup.Gsys is not setup.F:
        result['subsystem_saturated'] = fusion.is_saturated(setup.Gsys).saturated
    return {'verdict': 'saturated' if report.saturated else 'not_saturated', 'detail': detail, 'result': result}


def check_control(setup, s):
    r = control.controls_elementary_fusion(setup.Gsys, setup.F)
    return {
        'verdict': 'controls' if r.ok else 'does_not_control',
        'detail': '' if r.ok else f"missing morphism between {r.witness[0].label()} and {r.witness[1].label()}",
        'result': r.to_dict(),
    }


def check_mislin(setup, s):
    return _mislin_row(control.mislin_verdict(setup.Gsys, setup.F))


def check_local(setup, s):
    if setup.R is None:
        raise ValueError("check 'local' needs local_gens")
    L = control.local_subsystem(setup.G, setup.P, setup.R, s.p)
    row = _mislin_row(control.mislin_verdict(L, setup.F))
    row['result']['local'] = setup.R.label()
    return row


def max_degree_for(s, setup):
    if s.max_degree is not None:
        return s.max_degree
    override = settings.current().get('max_degree')
    if override is not None:
        return override
    return cohom.default_max_degree(len(setup.P.elements), s.p)


def check_dims(setup, s):
    N = max_degree_for(s, setup)
    if setup.Gsys is setup.F:
        dims = cohom.dims_table(setup.F, N)
        return {'verdict': 'computed', 'detail': f"N={N}", 'dims': dims,
                'result': {'N': N, 'system': dims}}
    rows = [cohom.stable_inclusion(setup.Gsys, setup.F, n) for n in range(N + 1)]
    dims_f = [r.dim_system for r in rows]
    dims_g = [r.dim_subsystem for r in rows]
    strict = [r.n for r in rows if r.strict]
    equal = fusion.systems_equal(setup.Gsys, setup.F)
    if not all(r.holds for r in rows):
        verdict = 'inconsistent'
    elif equal:
        verdict = 'equal' if dims_f == dims_g else 'inconsistent'
    elif strict:
        verdict = 'detected'
    elif s.p % 2 and N >= STRICT_BY_DEGREE:
        verdict = 'inconsistent'
    else:
        verdict = 'undetected'
    return {
        'verdict': verdict,
        'detail': f"N={N} strict_at={strict}",
        'dims': dims_f,
        'result': {'N': N, 'system': dims_f, 'subsystem': dims_g, 'strict_at': strict,
                   'systems_equal': equal},
    }


def check_strata(setup, s):
    table = control.strata_skeleton(setup.F)
    return {'verdict': 'computed', 'detail': f"{len(table.rows)} classes of elementary abelians",
            'result': table.to_dict()}


def check_weyl(setup, s):
    rows, ok = [], True
    for E in control.elementary_abelians(setup.F):
        via_n = control.aut_via_normalizer(setup.G, E)
        via_f = control.weyl_group(setup.F, E)
        same = via_n.elements == via_f.elements
        ok = ok and same
        rows.append({'E': E.label(), 'order': via_f.order, 'equal': same})
    return {'verdict': 'consistent' if ok else 'inconsistent',
            'detail': f"{len(rows)} elementary abelians", 'result': rows}


def check_transport(setup, s):
    if not control.controls_elementary_fusion(setup.Gsys, setup.F):
        return {'verdict': 'skipped', 'detail': 'no control on elementary abelians', 'result': {}}
    results = {
        'transport_classes': control.transport_classes(setup.Gsys, setup.F),
        'automizer_equality': control.automizer_equality(setup.Gsys, setup.F),
        'decomposition_check': control.decomposition_check(setup.Gsys, setup.F),
    }
    failed = [k for k, r in results.items() if not r.ok]
    return {'verdict': 'inconsistent' if failed else 'consistent',
            'detail': ','.join(failed), 'result': {k: r.to_dict() for k, r in results.items()}}


def check_probe(setup, s):
    probe = s.probe or {}
    report = cohom.mislin_hypothesis_probe(setup.Gsys, setup.F, probe.get('n', 1), probe.get('rmax', 1))
    least = ['none' if r.least_r is None else str(r.least_r) for r in report.rows]
    return {'verdict': 'passed' if report.passed else 'none',
            'detail': f"least_r={';'.join(least)}", 'result': report.to_dict()}


CHECK_RUNNERS = {
    'saturation': check_saturation,
    'control': check_control,
    'mislin': check_mislin,
    'dims': check_dims,
    'strata': check_strata,
    'remark14': check_weyl,
    'transport': check_transport,
    'local': check_local,
    'probe': check_probe,
}


# ============================================================================
# Reports
# ============================================================================


@dataclass
class Report:
    scenario_id: str
    group: str = ''
    p: int = 0
    subgroup: str = ''
    subgroup_order: int = 0
    ambient_sub: str = None
    checks: list = field(default_factory=list)
    catalog_hash: str = ''
    version: str = VERSION
    error: str = None

    @property
    def inconsistent(self):
        return any(c['verdict'] == 'inconsistent' for c in self.checks)

    @property
    def input_error(self):
        return self.error is not None or any(c['verdict'] == 'precondition_failed' for c in self.checks)

    @property
    def status(self):
        if self.input_error:
            return 'error'
        return 'inconsistent' if self.inconsistent else 'ok'

    def to_dict(self):
        out = dict(self.__dict__)
        out['status'] = self.status
        return out


def run_scenario(s, specs=None):
    """Run every requested check of s; caps and precondition failures are recorded per check."""
    specs = specs if specs is not None else catalog.load_catalog()
    report = Report(s.id, group=s.group, p=s.p, catalog_hash=catalog.catalog_hash(specs))
    try:
        setup = resolve(s, specs)
    except (ValueError, settings.CapExceeded) as e:
        log.error("scenario %s: %s", s.id, e)
        report.error = str(e)
        return report
    report.subgroup = setup.P.label()
    report.subgroup_order = len(setup.P.elements)
    report.ambient_sub = setup.H.label() if setup.H is not None else None
    timings = settings.current().report_timings
    for name in (CHECK_ALIASES.get(c, c) for c in s.checks):
        start = time.perf_counter()
        try:
            row = CHECK_RUNNERS[name](setup, s)
        except settings.CapExceeded as e:
            log.warning("scenario %s, check %s: %s", s.id, name, e)
            row = {'verdict': 'cap_exceeded', 'detail': str(e),
                   'result': {'what': e.what, 'size': e.size, 'limit': e.limit}}
        except ValueError as e:
            log.error("scenario %s, check %s: %s", s.id, name, e)
            row = {'verdict': 'precondition_failed', 'detail': str(e), 'result': {}}
        row = {'check': name, 'verdict': row['verdict'], 'detail': row.get('detail', ''),
               'dims': row.get('dims', []), 'result': row.get('result', {})}
        row['millis'] = int(round(1000 * (time.perf_counter() - start))) if timings else 0
        log.info("scenario %s: %s -> %s", s.id, name, row['verdict'])
        report.checks.append(row)
    return report


def _init_worker(overrides):
    settings.configure(**overrides)


def _run_one(args):
    s, specs = args
    return run_scenario(s, specs)


def exit_code(reports):
    if any(r.input_error for r in reports):
        return EXIT_INPUT
    if any(r.inconsistent for r in reports):
        return EXIT_INCONSISTENT
    return EXIT_OK


def summary_table(reports):
    rows = []
    for r in reports:
        rows.append({
            'scenario': r.scenario_id,
            'group': r.group,
            'p': r.p,
            '|P|': r.subgroup_order,
            'status': r.status,
            'verdicts': ' '.join(f"{c['check']}={c['verdict']}" for c in r.checks) or (r.error or ''),
        })
    return pd.DataFrame(rows, columns=['scenario', 'group', 'p', '|P|', 'status', 'verdicts'])


def batch(scenarios, specs=None, parallelism=1):
    """Run scenarios (in order) and return (exit code, reports, summary DataFrame)."""
    specs = specs if specs is not None else catalog.load_catalog()
    work = [(s, specs) for s in scenarios]
    if parallelism > 1 and len(work) > 1:
        overrides = {k: v for k, v in settings.current().items() if k in settings.DEFAULTS}
        with multiprocessing.Pool(parallelism, initializer=_init_worker, initargs=(overrides,)) as pool:
            reports = pool.map(_run_one, work)
    else:
        reports = [_run_one(w) for w in work]
    code = exit_code(reports)
    log.info("batch: %d scenario(s), exit code %d", len(reports), code)
    return code, reports, summary_table(reports)


def batch_files(paths, specs=None, parallelism=1):
    scenarios = []
    for path in paths:
        scenarios.extend(load_scenarios(path))
    return batch(scenarios, specs, parallelism)


def _document(reports):
    return {'status': 'ok', 'version': VERSION, 'count': len(reports),
            'reports': [_plain(r.to_dict()) for r in reports]}


def to_json(reports):
    return json.dumps(_document(reports), indent=2, sort_keys=True)


def to_csv(reports):
    output = io.StringIO()
    writer = csv.DictWriter(output, fieldnames=CSV_COLUMNS, lineterminator='\n')
    writer.writeheader()
    for r in reports:
        if r.error is not None:
            writer.writerow({'scenario_id': r.scenario_id, 'check': '-', 'verdict': 'error',
                             'detail': r.error, 'dims': '', 'millis': 0})
        for c in r.checks:
            writer.writerow({
                'scenario_id': r.scenario_id,
                'check': c['check'],
                'verdict': c['verdict'],
                'detail': c['detail'],
                'dims': ';'.join(str(d) for d in c['dims']),
                'millis': c['millis'],
            })
    return output.getvalue()


def to_yaml(reports):
    return yaml.safe_dump(_document(reports), sort_keys=True, default_flow_style=False)


# Formatter registry: short name -> (formatter_function, mime_type)
FORMATTERS = {
    'json': (to_json, 'application/json; charset=utf-8'),
    'csv': (to_csv, 'text/csv; charset=utf-8'),
    'yaml': (to_yaml, 'application/yaml; charset=utf-8'),
}


def format_output(reports, fmt):
    """Format reports; unknown formats fall back to JSON."""
    formatter, mime = FORMATTERS.get(fmt, FORMATTERS['json'])
    return formatter(reports), mime


# ============================================================================
# Module-level API (for use as a Python library)
# ============================================================================


def get_reports_data(paths, catalog_path=None, parallelism=1) -> dict:
    """Run scenario files and return {'status', 'exit_code', 'count', 'reports'}.

    Raises:
        catalog.CatalogError: if a catalog or scenario file does not parse.
    """
    specs = catalog.load_catalog(catalog_path)
    code, reports, _ = batch_files(paths, specs, parallelism)
    return {'status': 'ok', 'exit_code': code, 'count': len(reports),
            'reports': [r.to_dict() for r in reports]}


def get_reports_output(paths, catalog_path=None, parallelism=1, format='json') -> str:
    specs = catalog.load_catalog(catalog_path)
    _, reports, _ = batch_files(paths, specs, parallelism)
    return format_output(reports, format)[0]


# ============================================================================
# CLI Entry Point
# ============================================================================


def _common_flags():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--catalog', help='YAML catalog of extra groups')
    common.add_argument('--out', help='write the report here instead of stdout')
    common.add_argument('--format', choices=sorted(FORMATTERS), default='json', help='Output format (default: json)')
    common.add_argument('--max-elements', type=int, help='cap on group closure size')
    common.add_argument('--max-degree', type=int, help='cohomology degree for scenarios without max_degree')
    common.add_argument('--jobs', type=int, default=1, help='scenarios run in parallel')
    common.add_argument('--timings', action='store_true', help='record wall-clock millis per check')
    common.add_argument('-v', '--verbose', action='store_true', help='log progress at INFO to stderr')
    return common


def build_parser():
    common = _common_flags()
    parser = argparse.ArgumentParser(description='Check fusion systems against the Mislin control theorem')
    sub = parser.add_subparsers(dest='command', required=True)

    cat = sub.add_parser('catalog', parents=[common], help='catalog operations')
    cat.add_argument('action', choices=['validate', 'dump'])
    cat.add_argument('path', nargs='?', help='catalog file (default: --catalog or built-in)')

    run = sub.add_parser('run', parents=[common], help='run scenario files')
    run.add_argument('scenarios', nargs='+')

    for name, checks in (('mislin', ['mislin']), ('dims', ['dims']),
                         ('saturated', ['saturation']), ('strata', ['strata'])):
        sp = sub.add_parser(name, parents=[common], help=f"run the {checks[0]} check on one group")
        sp.add_argument('-g', '--group', required=True)
        sp.add_argument('-p', '--prime', type=int, required=True)
        sp.add_argument('--sylow', action='append', metavar='GEN',
                        help='generator of P (images list or cycles); default a Sylow subgroup')
        sp.add_argument('--sub', action='append', metavar='GEN', required=(name == 'mislin'),
                        help='generator of H with P <= H (images list or cycles)')
        if name == 'dims':
            sp.add_argument('-N', type=int, dest='N', help='top degree')
        sp.set_defaults(checks=checks)
    return parser


def _write(text, out):
    if out:
        with open(out, 'w') as fd:
            fd.write(text)
    else:
        sys.stdout.write(text if text.endswith('\n') else text + '\n')


def main_cli(argv=None):
    """Command-line interface."""
    args = build_parser().parse_args(argv)
    settings.configure(max_elements=args.max_elements, max_degree=args.max_degree,
                       report_timings=args.timings or None)
    if args.verbose:
        mylog.set_level('INFO')
    try:
        specs = catalog.load_catalog(getattr(args, 'path', None) or args.catalog)
        if args.command == 'catalog':
            if args.action == 'dump':
                own = getattr(args, 'path', None) or args.catalog
                _write(catalog.dump_catalog(catalog.read_catalog(own) if own else specs), args.out)
            else:
                groups = [{'name': s.name, 'degree': s.degree, 'order': catalog.build_group(s).order}
                          for s in specs]
                _write(json.dumps({'status': 'ok', 'count': len(groups), 'groups': groups,
                                   'catalog_hash': catalog.catalog_hash(specs)}, indent=2), args.out)
            return EXIT_OK
        if args.command == 'run':
            scenarios = [s for path in args.scenarios for s in load_scenarios(path)]
        else:
            scenarios = [Scenario(
                id=f"{args.command}-{args.group}-{args.prime}",
                group=args.group, p=args.prime,
                subgroup_gens=args.sylow, ambient_sub_gens=args.sub,
                max_degree=getattr(args, 'N', None), checks=args.checks,
            )]
    except catalog.CatalogError as e:
        print(json.dumps({'status': 'error', 'error': str(e)}), file=sys.stderr)
        return EXIT_INPUT

    code, reports, summary = batch(scenarios, specs, parallelism=max(1, args.jobs))
    _write(format_output(reports, args.format)[0], args.out)
    if len(summary):
        print(summary.to_string(index=False), file=sys.stderr)
    return code


if __name__ == '__main__':
    sys.exit(main_cli())
