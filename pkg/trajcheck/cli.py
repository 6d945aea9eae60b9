import csv
import io
import logging
from collections import namedtuple
from functools import wraps

import click

from trajcheck.basis import build_shifted_legendre
from trajcheck.config import DEFAULT_CONFIG_FILE, Settings
from trajcheck.detector import EXIT_CODES, INCONCLUSIVE, INCONSISTENT, \
    TRAJECTORY_CONSISTENT, algebraic_support_check, check_trajectory, \
    reconstruct_trajectory, residual_trend, sample_series
from trajcheck.errors import InputError, TrajcheckError
from trajcheck.moments import LEBESGUE_MARGINAL, coefficient_row, \
    dump_moments, load_marginal, load_moments, load_store, slice_coordinate
from trajcheck.orthopoly import build_from_moments
from trajcheck.report import atomic_write, build_report, dump_structured, \
    input_digest, render_summary, report_format
from trajcheck.series import LegendreSeries, dump_series, load_series
from trajcheck.synth import DENSITIES, KINDS, MeasureSpec, \
    TrajectoryFunction, synthesize


logger = logging.getLogger('trajcheck.cli')

TrajcheckContext = namedtuple('TrajcheckContext', 'settings')

INPUT_FORMATS = ['auto', 'csv', 'structured']
DEFAULT_SAMPLES = 101


@click.group()
@click.option('-c', '--config-file',
              type=click.Path(exists=True, dir_okay=False, readable=True),
              help='Settings file (YAML). Defaults to ./{} when it '
                   'exists'.format(DEFAULT_CONFIG_FILE))
@click.option('-v', '--verbose', is_flag=True,
              help='Log debugging details, such as per-power residuals')
@click.option('-q', '--quiet', is_flag=True,
              help='Only log warnings and errors')
@click.pass_context
def main(ctx, config_file, verbose, quiet):
    logging.basicConfig(level=logging.INFO)
    if verbose:
        level = logging.DEBUG
    elif quiet:
        level = logging.WARNING
    else:
        level = logging.INFO
    logging.getLogger('trajcheck').setLevel(level)

    try:
        settings = Settings.load(config_file)
    except TrajcheckError as e:
        click.echo('Error: {}'.format(e), err=True)
        ctx.exit(1)

    ctx.obj = TrajcheckContext(settings=settings)


def trajcheck_cmd(f):
    @click.pass_context
    @wraps(f)
    def wrapper(ctx, *args, **kwargs):
        try:
            ret = f(ctx.find_object(TrajcheckContext), *args, **kwargs)
        except TrajcheckError as e:
            click.echo('Error: {}'.format(e), err=True)
            ret = 1
        except OSError as e:
            click.echo('Error: {}'.format(e), err=True)
            ret = 1
        except Exception:
            logger.exception('Unexpected exception')
            ret = 1

        if ret:
            ctx.exit(ret)

    return wrapper


def run(argv=None):
    """
    Entry point returning the exit code. Usage errors map to 1 so that 2
    and 3 stay reserved for verdicts.
    """
    try:
        ret = main.main(args=argv, prog_name='trajcheck',
                        standalone_mode=False)
    except click.ClickException as e:
        e.show()
        return 1
    except click.Abort:
        click.echo('Aborted!', err=True)
        return 1

    return ret or 0


def _positive(ctx, param, value):
    if value is not None and not value > 0:
        raise click.BadParameter('must be > 0, got {}'.format(value))
    return value


def _truncation_list(ctx, param, value):
    try:
        result = [int(v) for v in value.split(',') if v.strip()]
    except ValueError:
        raise click.BadParameter('expected comma-separated integers')
    if not result or any(n < 0 for n in result):
        raise click.BadParameter('expected one or more integers >= 0')
    return result


def _float_list(ctx, param, value):
    if value is None:
        return None
    try:
        return [float(v) for v in value.split(',') if v.strip()]
    except ValueError:
        raise click.BadParameter('expected comma-separated numbers')


def _input_format(path, fmt):
    if fmt != 'auto':
        return fmt
    return 'csv' if path.lower().endswith('.csv') else 'structured'


def _read_bytes(path):
    with open(path, 'rb') as f:
        return f.read()


def _load_table(obj, path, fmt, marginal_path, normalize):
    data = _read_bytes(path)
    marginal = load_marginal(_read_bytes(marginal_path)) \
        if marginal_path else None
    table = load_moments(data, _input_format(path, fmt), marginal=marginal,
                         normalize=normalize, settings=obj.settings)
    return table, input_digest(data)


def _emit(out, writer):
    if out:
        atomic_write(out, writer)
    else:
        buf = io.StringIO()
        writer(buf)
        click.echo(buf.getvalue(), nl=False)


def _write_report(path, report):
    if path:
        fmt = report_format(path)
        atomic_write(path, lambda f: dump_structured(report, f, fmt))


def _dump_samples(samples):
    def writer(stream):
        w = csv.writer(stream, lineterminator='\n')
        w.writerow(['t', 'x'])
        for t, x in samples:
            w.writerow(['{:.17g}'.format(t), '{:.17g}'.format(x)])
    return writer


moments_option = click.option(
    '--moments', 'moments_path', required=True,
    type=click.Path(exists=True, dir_okay=False, readable=True),
    help='Moment table: CSV with header i,j,value or a structured '
         'YAML/JSON file')
input_format_option = click.option(
    '--input-format', default='auto', type=click.Choice(INPUT_FORMATS),
    help='Moment file format. "auto" picks CSV for .csv files and the '
         'structured format otherwise')
marginal_option = click.option(
    '--marginal-moments', 'marginal_path',
    type=click.Path(exists=True, dir_okay=False, readable=True),
    help='CSV (j,value) of t-marginal moments, replacing the Lebesgue '
         'marginal')
normalize_option = click.option(
    '--normalize', is_flag=True,
    help='Rescale a table with finite positive mass to a probability '
         'measure')
report_option = click.option(
    '--report', 'report_path', type=click.Path(dir_okay=False),
    help='Write a structured report; JSON for .json paths, YAML otherwise')
stamp_option = click.option(
    '--stamp', is_flag=True,
    help='Embed a generation timestamp in the report')


@main.command()
@click.option('--degree', required=True, type=click.IntRange(min=0),
              help='Highest polynomial degree')
@click.option('--format', 'fmt', default='csv',
              type=click.Choice(['csv', 'json']), help='Output format')
@marginal_option
@click.option('--out', type=click.Path(dir_okay=False),
              help='Output file; stdout when omitted')
@trajcheck_cmd
def basis(obj, degree, fmt, marginal_path, out):
    """
    Dump the monomial coefficients of the orthonormal basis.

    Rows of the shifted Legendre matrix for the Lebesgue marginal, or of
    the polynomials orthonormal for the marginal whose moments are given
    with --marginal-moments.
    """
    if marginal_path:
        moments = load_marginal(_read_bytes(marginal_path))
        family = build_from_moments(moments, degree, settings=obj.settings)
        transform = family.transform(degree)
        tag = family.tag
    else:
        transform = build_shifted_legendre(degree, settings=obj.settings)
        tag = 'legendre'

    def write_csv(stream):
        w = csv.writer(stream, lineterminator='\n')
        w.writerow(['j', 'k', 'coefficient'])
        for j, row in transform.rows():
            for k, c in enumerate(row):
                w.writerow([j, k, '{:.17g}'.format(c)])

    def write_json(stream):
        dump_structured({'basis': tag, 'degree': degree,
                         'rows': [row for _, row in transform.rows()]},
                        stream, 'json')

    _emit(out, write_csv if fmt == 'csv' else write_json)


@main.command()
@moments_option
@click.option('--i', 'power', required=True, type=click.IntRange(min=0),
              help='Power of x whose disintegration density is expanded')
@click.option('--degree', required=True, type=click.IntRange(min=0),
              help='Highest basis index')
@input_format_option
@marginal_option
@normalize_option
@click.option('--out', type=click.Path(dir_okay=False),
              help='Series CSV (j,coefficient); stdout when omitted')
@trajcheck_cmd
def coeffs(obj, moments_path, power, degree, input_format, marginal_path,
           normalize, out):
    """
    Print the basis coefficients of f_i, the i-th conditional moment.
    """
    table, _ = _load_table(obj, moments_path, input_format, marginal_path,
                           normalize)
    series = coefficient_row(table, power, degree, settings=obj.settings)
    _emit(out, lambda f: dump_series(series, f))


@main.command()
@moments_option
@click.option('--truncation', required=True, type=click.IntRange(min=0),
              help='Truncation n of the reconstructed trajectory')
@click.option('--max-power', required=True, type=click.IntRange(min=2),
              help='Highest power K compared')
@click.option('--tol', required=True, type=float, callback=_positive,
              help='Residual tolerance')
@report_option
@click.option('--linf', is_flag=True,
              help='Use the max-norm on coefficients instead of l2')
@click.option('--clamp', is_flag=True,
              help='Clamp sampled reconstruction values to [0, 1]')
@click.option('--samples', default=DEFAULT_SAMPLES,
              type=click.IntRange(min=0),
              help='Reconstruction samples included in the report (0 to '
                   'skip)')
@input_format_option
@marginal_option
@normalize_option
@stamp_option
@trajcheck_cmd
def check(obj, moments_path, truncation, max_power, tol, report_path, linf,
          clamp, samples, input_format, marginal_path, normalize, stamp):
    """
    Test whether the moments come from a measure on a trajectory.

    Exits with 0 when the table is consistent with a trajectory, 2 when it
    is not and 3 when the residuals fall between the tolerance and its
    escalation.
    """
    table, digest = _load_table(obj, moments_path, input_format,
                                marginal_path, normalize)
    report = check_trajectory(table, truncation, max_power, tol, linf=linf,
                              settings=obj.settings)

    body = report.to_dict()
    if samples and report.verdict != INCONSISTENT:
        if samples < 2:
            raise InputError('need at least 2 samples, got {}'.format(
                samples))
        body['samples'] = [list(p) for p in reconstruct_trajectory(
            report, samples, clamp=clamp)]

    _write_report(report_path, build_report(body, digest, stamp=stamp))
    click.echo(render_summary('check', report.to_dict()), nl=False)
    return report.exit_code


@main.command()
@click.option('--series', 'series_path', required=True,
              type=click.Path(exists=True, dir_okay=False, readable=True),
              help='Series CSV (j,coefficient) as written by coeffs')
@click.option('--samples', required=True, type=click.IntRange(min=2),
              help='Number of uniform sample points, endpoints included')
@click.option('--out', type=click.Path(dir_okay=False),
              help='Output CSV (t,x); stdout when omitted')
@click.option('--clamp', is_flag=True,
              help='Clamp values to [0, 1]')
@marginal_option
@trajcheck_cmd
def reconstruct(obj, series_path, samples, out, clamp, marginal_path):
    """
    Evaluate a coefficient series on a uniform grid of [0, 1].
    """
    series = load_series(_read_bytes(series_path))
    if marginal_path:
        moments = load_marginal(_read_bytes(marginal_path))
        family = build_from_moments(moments, series.degree,
                                    settings=obj.settings)
        series = LegendreSeries.new(series.coeffs, family)

    _emit(out, _dump_samples(sample_series(series, samples, clamp=clamp)))


@main.command()
@click.option('--kind', default='trajectory', type=click.Choice(KINDS),
              help='Measure kind')
@click.option('--fn', 'functions', multiple=True,
              help='Trajectory function: {}, with poly:c0,c1,... in '
                   'ascending powers and constant:v. Repeat for '
                   'mixtures'.format(
                       ', '.join(TrajectoryFunction.available_names())))
@click.option('--weights', callback=_float_list,
              help='Comma-separated mixture weights; equal by default')
@click.option('--marginal', default='lebesgue',
              type=click.Choice(sorted(DENSITIES)),
              help='Density of the t-marginal')
@click.option('--max-i', required=True, type=click.IntRange(min=0))
@click.option('--max-j', required=True, type=click.IntRange(min=0))
@click.option('--out', type=click.Path(dir_okay=False),
              help='Output file; stdout when omitted')
@click.option('--format', 'fmt', default='csv',
              type=click.Choice(['csv', 'structured']),
              help='Output format. Tables with a non-Lebesgue marginal need '
                   'the structured format')
@click.option('--order', type=click.IntRange(min=1),
              help='Gauss-Legendre quadrature order')
@click.option('--noise', default=0.0, type=click.FloatRange(min=0.0),
              help='Amplitude of uniform noise added to every moment but '
                   'the marginal row')
@click.option('--seed', type=int, help='Seed for --noise')
@trajcheck_cmd
def synth(obj, kind, functions, weights, marginal, max_i, max_j, out, fmt,
          order, noise, seed):
    """
    Generate the moment table of a synthetic measure.
    """
    spec = MeasureSpec.from_dict({'kind': kind,
                                  'trajectories': list(functions),
                                  'weights': weights,
                                  'marginal': marginal})
    if fmt == 'csv' and spec.marginal.name != LEBESGUE_MARGINAL:
        raise InputError('CSV moment files imply a Lebesgue marginal; use '
                         '--format structured for marginal {!r}'.format(
                             marginal))
    table = synthesize(spec, max_i, max_j, order=order, noise=noise,
                       seed=seed, settings=obj.settings)

    _emit(out, lambda f: dump_moments(table, f, fmt))


@main.command('algebraic-check')
@moments_option
@click.option('--degree', 'degree_s', required=True,
              type=click.IntRange(min=0),
              help='Degree s of the monomials indexing the moment matrix')
@report_option
@input_format_option
@normalize_option
@stamp_option
@trajcheck_cmd
def algebraic_check(obj, moments_path, degree_s, report_path, input_format,
                    normalize, stamp):
    """
    Look for a polynomial vanishing on the support of the measure.
    """
    table, digest = _load_table(obj, moments_path, input_format, None,
                                normalize)
    result = algebraic_support_check(table, degree_s, settings=obj.settings)

    body = result.to_dict()
    _write_report(report_path, build_report(body, digest, stamp=stamp))

    context = dict(body, polynomial=result.format_polynomial())
    click.echo(render_summary('algebraic', context), nl=False)


@main.command()
@moments_option
@click.option('--truncations', required=True, callback=_truncation_list,
              help='Comma-separated truncations n, e.g. 1,2,4,8')
@click.option('--max-power', required=True, type=click.IntRange(min=2))
@click.option('--linf', is_flag=True)
@report_option
@input_format_option
@marginal_option
@normalize_option
@stamp_option
@trajcheck_cmd
def trend(obj, moments_path, truncations, max_power, linf, report_path,
          input_format, marginal_path, normalize, stamp):
    """
    Show how the residuals evolve with the truncation.
    """
    table, digest = _load_table(obj, moments_path, input_format,
                                marginal_path, normalize)
    result = residual_trend(table, truncations, max_power, linf=linf,
                            settings=obj.settings)

    body = result.to_dict()
    _write_report(report_path, build_report(body, digest, stamp=stamp))
    click.echo(render_summary('trend', body), nl=False)


def worst_verdict(verdicts):
    if INCONSISTENT in verdicts:
        return INCONSISTENT
    elif INCONCLUSIVE in verdicts:
        return INCONCLUSIVE
    return TRAJECTORY_CONSISTENT


@main.command()
@click.option('--store', 'store_path', required=True,
              type=click.Path(exists=True, dir_okay=False, readable=True),
              help='Moment store: CSV with header j,alpha,value or a '
                   'structured file')
@click.option('--store-format', default='auto',
              type=click.Choice(INPUT_FORMATS))
@click.option('--coordinate', 'coordinates', multiple=True,
              type=click.IntRange(min=1),
              help='Coordinate to check, numbered from 1. Repeat for '
                   'several; all coordinates when omitted')
@click.option('--truncation', required=True, type=click.IntRange(min=0))
@click.option('--max-power', required=True, type=click.IntRange(min=2))
@click.option('--tol', required=True, type=float, callback=_positive)
@click.option('--linf', is_flag=True)
@report_option
@stamp_option
@trajcheck_cmd
def batch(obj, store_path, store_format, coordinates, truncation,
          max_power, tol, linf, report_path, stamp):
    """
    Check every coordinate of a multi-dimensional moment store.

    Exits with 2 if any coordinate is inconsistent, otherwise 3 if any is
    inconclusive, otherwise 0.
    """
    data = _read_bytes(store_path)
    store = load_store(data, _input_format(store_path, store_format))
    if not coordinates:
        coordinates = range(1, store.dimension + 1)

    results = []
    for c in coordinates:
        table = slice_coordinate(store, c, settings=obj.settings)
        report = check_trajectory(table, truncation, max_power, tol,
                                  linf=linf, settings=obj.settings)
        logger.info('Coordinate %d: %s', c, report.verdict)
        results.append(dict(report.to_dict(), coordinate=c))

    verdict = worst_verdict([r['verdict'] for r in results])
    body = {'verdict': verdict, 'coordinates': results}
    _write_report(report_path, build_report(body, input_digest(data),
                                            stamp=stamp))
    click.echo(render_summary('batch', body), nl=False)
    return EXIT_CODES[verdict]
