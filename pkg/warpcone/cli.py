"""
SPDX-License-Identifier: BSD-3-Clause
Copyright (c) 2024 warpcone developers.
See LICENSE.txt for license details.
"""

import argparse
import contextlib
import logging
import os
import sys
import yaml

from warpcone.__init__ import __version__
from warpcone.cat_verify import CatReport, barrier_subintervals, cat_test, env_threads, hypothesis_audit
from warpcone.document import dump_json, dump_yaml, load_dict, document_from_dict
from warpcone.errors import PreconditionError, SolverError
from warpcone.filling_conditions import (ManifoldDescriptor, SubspaceDescriptor, audit_conditions,
                                         local_convexity_probe)
from warpcone.glue_model import GluedSpace, seam_claims_check, seam_isometry_check
from warpcone.registry import DocKind, document_class, documents, schema_rows, summary, warping_kinds
from warpcone.types import SchemaTagged
from warpcone.warp_synth import Certificate, check_fk_convex_ae, check_fk_convex_barrier, delta_from_c, synthesize
from warpcone.warped_cone import ConeDescriptor, ConeSpace, Fiber, geodesic, oracle_agreement

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_INVALID_INPUT = 2
EXIT_SOLVER_FAILURE = 3


def list_supported_documents():
    width = 108
    separator = '+' + '-' * (width-2) + '+'
    lf = f"|".ljust(width-1) + '|'
    print(separator)
    for kind in DocKind:
        print(lf)
        print(f'| type: {kind.name}'.ljust(width-1) + '|')
        print(lf)
        for cls in documents(kind):
            name, doc = summary(cls)
            print(f'| {name.ljust(33)} {doc}'.ljust(width-1) + '|')
        print(lf)
        print(separator)
    print(f'| warping kinds: {", ".join(warping_kinds())}'.ljust(width-1) + '|')
    print(separator)


def list_document_schema(doc_name):
    cls = document_class(doc_name)
    print(f'{"Name".ljust(20)} {"Type".ljust(30)} {"Opt"}')
    for name, field, opt in schema_rows(cls):
        opt = ', '.join(opt['constants'].keys()) if 'constants' in opt else ''
        print(f'{name.ljust(20)} {field.ljust(30)} {opt}')


def writer(fname, content):
    if fname != '-':
        with open(fname, 'w', encoding='utf-8') as f:
            f.write(content)
    else:
        sys.stdout.write(content)


def dict_set(d, keys, item):
    if len(keys) > 1:
        key, rest = keys[0], keys[1:]
        if key not in d:
            d[key] = {}
        dict_set(d[key], rest, item)
    else:
        d[keys[0]] = item


def parse_point(text):
    ''' "t,theta" '''
    try:
        t, theta = (float(v) for v in text.split(','))
    except ValueError:
        raise argparse.ArgumentTypeError(f'expected t,theta, received "{text}"')
    return t, theta


def parse_resolution(text):
    ''' "n_t,n_theta" '''
    try:
        n_t, n_theta = (int(v) for v in text.split(','))
    except ValueError:
        raise argparse.ArgumentTypeError(f'expected n_t,n_theta, received "{text}"')
    return n_t, n_theta


class RunConfig:
    ''' Settings of one command run '''

    def __init__(self, args):
        self.command = args.command
        self.output = args.output
        self.seed = args.seed
        self.oracle_rel = args.oracle_rel
        self.cat_abs = args.cat_abs
        self.cert_abs = args.cert_abs
        self.samples = args.samples
        self.resolution = args.resolution
        self.cert_grid = args.cert_grid
        self.grid_gap = args.grid_gap
        self.threads = env_threads() if args.threads is None else args.threads
        self.overrides = args.set or []
        self.ignore_schema_errors = args.ignore_schema_errors
        self.validate()

    def validate(self):
        for name in ('oracle_rel', 'cat_abs', 'cert_abs'):
            value = getattr(self, name)
            if not value > 0:
                raise PreconditionError('out-of-range', f'tolerance {name} = {value} must be positive')
        if self.grid_gap is not None and not self.grid_gap > 0:
            raise PreconditionError('out-of-range', f'grid gap {self.grid_gap} must be positive')
        if self.threads < 1:
            raise PreconditionError('out-of-range', f'threads = {self.threads}')
        return self

    _switches = [
        (Certificate, 'abs_slack', 'cert_abs'),
        (CatReport, 'tolerance', 'cat_abs'),
        (SchemaTagged, 'ignore_schema_errors', 'ignore_schema_errors'),
    ]

    @contextlib.contextmanager
    def applied(self):
        ''' push the switches into the document classes for the duration of the run '''
        saved = [getattr(cls, attr) for cls, attr, _ in self._switches]
        try:
            for cls, attr, name in self._switches:
                setattr(cls, attr, getattr(self, name))
            yield self
        finally:
            for (cls, attr, _), value in zip(self._switches, saved):
                setattr(cls, attr, value)

    def load(self, fname, expected, overrides=False):
        ''' read a document, applying -s key.path=value overrides when asked '''
        src = load_dict(fname)
        if overrides:
            for s in self.overrides:
                if '=' not in s:
                    raise PreconditionError('invalid-descriptor', f'override "{s}" is not key=value')
                k, v = s.split('=', 1)
                dict_set(src, k.split('.'), yaml.safe_load(v))
        return document_from_dict(src, expected)

    def emit(self, doc):
        _, ext = os.path.splitext(self.output)
        writer(self.output, dump_yaml(doc) if ext in ('.yml', '.yaml') else dump_json(doc))


def _status(passed):
    return EXIT_OK if passed else EXIT_CHECK_FAILED


def cmd_synth(cfg, args):
    if args.delta is None and args.c is None:
        raise PreconditionError('out-of-range', 'synth needs --delta or --c')
    delta = args.delta if args.delta is not None else delta_from_c(args.c)
    f = synthesize(args.b, delta, args.profile)
    ae = check_fk_convex_ae(f, f.K, cfg.cert_grid)
    barrier = check_fk_convex_barrier(f, f.K, barrier_subintervals(f))
    if (args.fiber_length is None) != (args.t_max is None):
        raise PreconditionError('out-of-range', '--fiber-length and --t-max go together')
    if args.fiber_length is not None:
        doc = ConeSpace(f, Fiber(args.fiber_kind, args.fiber_length), args.t_max).descriptor()
    else:
        doc = f.descriptor()
    cfg.emit(doc)
    summary = {
        't0': f.t0, 'b': f.b, 'delta': f.delta, 'mu': f.mu, 'K': f.K,
        'fk_convex_ae': ae.passed, 'fk_convex_barrier': barrier.passed,
    }
    sys.stderr.write(dump_yaml(summary))
    return _status(ae.passed and barrier.passed)


def _load_cone(cfg, args):
    return cfg.load(args.cone, ConeDescriptor, overrides=True).build()


def cmd_geodesic(cfg, args):
    cone = _load_cone(cfg, args)
    x = cone.point(*args.from_point)
    y = cone.point(*args.to_point)
    path = geodesic(cone, x, y, cfg.samples)
    if args.csv:
        writer(args.csv, path.to_csv())
    if not args.oracle:
        cfg.emit(path.report())
        return EXIT_OK
    agreement = oracle_agreement(cone, x, y, cfg.resolution, cfg.oracle_rel)
    cfg.emit({'geodesic': path.report().to_dict(), 'oracle': agreement.to_dict()})
    return _status(agreement.passed)


def cmd_oracle(cfg, args):
    cone = _load_cone(cfg, args)
    result = oracle_agreement(cone, cone.point(*args.from_point), cone.point(*args.to_point),
                              cfg.resolution, cfg.oracle_rel)
    cfg.emit(result)
    return _status(result.passed)


def cmd_cat(cfg, args):
    cone = _load_cone(cfg, args)
    K = args.K if args.K == 'auto' else float(args.K)
    result = cat_test(cone, K, args.triangles, args.points_per_side, cfg.seed, cfg.threads)
    if args.offenders:
        writer(args.offenders, result.offenders_csv())
    if args.audit:
        cfg.emit({'hypotheses': hypothesis_audit(cone).to_dict(), 'cat': result.to_dict()})
    else:
        cfg.emit(result)
    return _status(result.passed)


def cmd_check(cfg, args):
    m = cfg.load(args.manifold, ManifoldDescriptor, overrides=True)
    s = cfg.load(args.subspace, SubspaceDescriptor) if args.subspace else None
    result = audit_conditions(m, s, cfg.grid_gap)
    cfg.emit(result)
    return _status(result.passed)


def _load_glued(cfg, args):
    m = cfg.load(args.manifold, ManifoldDescriptor, overrides=True)
    s = cfg.load(args.subspace, SubspaceDescriptor) if args.subspace else None
    return GluedSpace.build(m, args.b, args.c, s, args.b_prime)


def cmd_seam(cfg, args):
    g = _load_glued(cfg, args)
    isometry = seam_isometry_check(g, args.component, args.pairs, cfg.seed)
    if g.subspace is None:
        cfg.emit(isometry)
        return _status(isometry.passed)
    claims = seam_claims_check(g, args.pairs, cfg.seed)
    cfg.emit({'isometry': isometry.to_dict(), 'claims': claims.to_dict()})
    return _status(isometry.passed and claims.passed)


def cmd_probe(cfg, args):
    if not args.subspace:
        raise PreconditionError('invalid-descriptor', 'probe needs --subspace')
    g = _load_glued(cfg, args)
    result = local_convexity_probe(g.cone(args.component), g.subspace, args.pairs, cfg.seed, args.component,
                                   args.lcr, g.isotopy, cfg.threads)
    cfg.emit(result)
    return _status(result.passed)


def cmd_list(cfg, args):
    if args.name:
        list_document_schema(args.name)
    else:
        list_supported_documents()
    return EXIT_OK


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('-o', '--output',
                        type=str,
                        default='-',
                        help='report file, JSON or YAML by extension (default: stdout)'
    )
    common.add_argument('--seed',
                        type=int,
                        default=0,
                        help='random seed (default: 0)'
    )
    common.add_argument('--oracle-rel',
                        type=float,
                        default=0.02,
                        help='relative tolerance of the mesh oracle'
    )
    common.add_argument('--cat-abs',
                        type=float,
                        default=1e-4,
                        help='absolute tolerance of the CAT(K) comparison'
    )
    common.add_argument('--cert-abs',
                        type=float,
                        default=1e-9,
                        help='absolute slack of the F_K certificates'
    )
    common.add_argument('--samples',
                        type=int,
                        default=129,
                        help='samples per geodesic'
    )
    common.add_argument('--resolution',
                        type=parse_resolution,
                        default=(400, 800),
                        help='oracle mesh n_t,n_theta'
    )
    common.add_argument('--cert-grid',
                        type=int,
                        default=10000,
                        help='initial grid size of the F_K certificate'
    )
    common.add_argument('--grid-gap',
                        type=float,
                        help='largest level spacing accepted by the B1 check (default: b\'/100)'
    )
    common.add_argument('--threads',
                        type=int,
                        help='worker threads (default: WARPCONE_THREADS or 1)'
    )
    common.add_argument('-s', '--set',
                        type=str,
                        action='append',
                        help='set a field of the primary input document, e.g. fiber.L=6.5'
    )
    common.add_argument('--ignore-schema-errors',
                        action='store_true',
                        help='accept documents with a foreign schema tag or stale derived values'
    )
    common.add_argument('-v', '--verbosity',
                        type=int,
                        choices=[0, 1, 2],
                        default=0,
                        help='set verbosity (0=quiet, 1=info, 2=debug)'
    )

    parser = argparse.ArgumentParser(description='Warped cones, CAT(K) checks and cone-off filling conditions')
    parser.add_argument('--version',
                        action='version',
                        version='%(prog)s ' + __version__
    )
    sub = parser.add_subparsers(dest='command', metavar='command')
    sub.required = True

    p = sub.add_parser('synth', parents=[common], help='synthesize a cone warping function')
    p.add_argument('--b', type=float, required=True, help='gluing level b')
    p.add_argument('--delta', type=float, help='apex slope')
    p.add_argument('--c', type=float, help='constant c, apex slope pi/c')
    p.add_argument('--profile', choices=['linear-derivative', 'smooth'], default='linear-derivative')
    p.add_argument('--fiber-kind', choices=['circle', 'interval'], default='circle')
    p.add_argument('--fiber-length', type=float, help='write a cone descriptor with this fiber length')
    p.add_argument('--t-max', type=float, help='upper end of the cone base')
    p.set_defaults(handler=cmd_synth)

    for name, handler, text in (('geodesic', cmd_geodesic, 'shortest path between two cone points'),
                                ('oracle', cmd_oracle, 'compare the solver with the mesh oracle')):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument('--cone', required=True, help='cone descriptor')
        p.add_argument('--from', dest='from_point', type=parse_point, required=True, metavar='T,THETA')
        p.add_argument('--to', dest='to_point', type=parse_point, required=True, metavar='T,THETA')
        if name == 'geodesic':
            p.add_argument('--oracle', action='store_true', help='also run the mesh oracle')
            p.add_argument('--csv', type=str, help='write the polyline (t,theta,s) here')
        p.set_defaults(handler=handler)

    p = sub.add_parser('cat', parents=[common], help='sampled CAT(K) comparison test')
    p.add_argument('--cone', required=True, help='cone descriptor')
    p.add_argument('--K', type=str, default='auto', help='curvature bound to test, or "auto"')
    p.add_argument('--triangles', type=int, default=100)
    p.add_argument('--points-per-side', type=int, default=5)
    p.add_argument('--offenders', type=str, help='write per-triangle worst violations as CSV')
    p.add_argument('--audit', action='store_true', help='include the hypothesis audit')
    p.set_defaults(handler=cmd_cat)

    p = sub.add_parser('check', parents=[common], help='audit filling conditions A and B')
    p.add_argument('--manifold', required=True, help='manifold descriptor')
    p.add_argument('--subspace', help='subspace descriptor')
    p.set_defaults(handler=cmd_check)

    for name, handler, text in (('seam', cmd_seam, 'seam isometry and isotopy claims of the glued space'),
                                ('probe', cmd_probe, 'sampled local convexity of Y')):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument('--manifold', required=True, help='manifold descriptor')
        p.add_argument('--subspace', help='subspace descriptor (provides b, b\', c)')
        p.add_argument('--b', type=float)
        p.add_argument('--c', type=float)
        p.add_argument('--b-prime', type=float)
        p.add_argument('--component', type=int, default=0)
        p.add_argument('--pairs', type=int, default=200 if name == 'probe' else 100)
        if name == 'probe':
            p.add_argument('--lcr', type=float, help='local convexity radius of S')
        p.set_defaults(handler=handler)

    p = sub.add_parser('list', parents=[common], help='list documents or the schema of one')
    p.add_argument('name', nargs='?', help='document name')
    p.set_defaults(handler=cmd_list)

    return parser


def run(argv=None):
    ''' parse argv, run one command and return its exit code '''
    parser = build_parser()
    args = parser.parse_args(argv)

    logging.basicConfig(
        format='%(levelname)7s: %(message)s',
        level=[logging.WARNING, logging.INFO, logging.DEBUG][args.verbosity]
    )

    try:
        cfg = RunConfig(args)
        with cfg.applied():
            return args.handler(cfg, args)
    except PreconditionError as e:
        print(e, file=sys.stderr)
        return EXIT_INVALID_INPUT
    except (ValueError, KeyError, OSError) as e:
        print(f'invalid-descriptor: {e}', file=sys.stderr)
        return EXIT_INVALID_INPUT
    except SolverError as e:
        print(e, file=sys.stderr)
        return EXIT_SOLVER_FAILURE
    except RuntimeError as e:
        print(f'solver-failure: {e}', file=sys.stderr)
        return EXIT_SOLVER_FAILURE


def main():
    sys.exit(run())


if __name__ == '__main__':
    main()
