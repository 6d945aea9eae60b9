"""
Structured reports, atomic file output and the human-readable summaries
printed by the command line tool.
"""

import datetime
import hashlib
import json
import logging
import os
import tempfile

import yaml
from jinja2 import Template

from trajcheck import VERSION
from trajcheck.errors import InputError
from trajcheck.util import JSONEncoder, plain


logger = logging.getLogger('trajcheck.report')

TOOL_NAME = 'trajcheck'
REPORT_FORMATS = ('yaml', 'json')


def input_digest(data):
    if isinstance(data, str):
        data = data.encode('utf-8')
    return 'sha256:' + hashlib.sha256(data).hexdigest()


def report_header(digest, stamp=False):
    header = {'tool': TOOL_NAME, 'version': VERSION, 'input_digest': digest}
    if stamp:
        header['generated_at'] = datetime.datetime.now(
            datetime.timezone.utc).isoformat()
    return header


def build_report(body, digest, stamp=False):
    report = report_header(digest, stamp=stamp)
    report.update(plain(body))
    return report


def report_format(path):
    return 'json' if str(path).lower().endswith('.json') else 'yaml'


def dump_structured(obj, stream, fmt='yaml'):
    if fmt == 'json':
        json.dump(obj, stream, cls=JSONEncoder, indent=2, sort_keys=False)
        stream.write('\n')
    elif fmt == 'yaml':
        yaml.safe_dump(plain(obj), stream, default_flow_style=False,
                       sort_keys=False)
    else:
        raise InputError('unknown report format {!r}'.format(fmt))


def atomic_write(path, writer, mode='w'):
    """
    Call `writer(stream)` on a temporary file next to `path`, then move it
    into place. The temporary file is removed if anything fails, so `path`
    is either left untouched or fully written.
    """
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp_path = tempfile.mkstemp(prefix='.trajcheck-', suffix='.tmp',
                                    dir=directory)
    try:
        kwargs = {} if 'b' in mode else {'encoding': 'utf-8', 'newline': ''}
        with os.fdopen(fd, mode, **kwargs) as f:
            writer(f)
        os.replace(tmp_path, path)
    except BaseException:
        try:
            os.unlink(tmp_path)
        except OSError:  # pragma: nocover
            pass
        raise

    logger.debug('Wrote %s', path)


SUMMARIES = {
    'check': """\
truncation n = {{ truncation_n }}, max power K = {{ max_power_K }}, \
tolerance = {{ '%.3g' | format(tolerance) }} ({{ norm }})
{% for r in residuals -%}
r_{{ r.power }} = {{ '%.6e' | format(r.value) }} \
over {{ r.compared_length }} coefficients
{% endfor -%}
sup-norm estimate: {{ '%.6g' | format(sup_norm_estimate) }}
{% for w in warnings -%}
warning: {{ w }}
{% endfor -%}
verdict: {{ verdict }}\
{% if downgraded %} (downgraded from trajectory_consistent){% endif %}
""",
    'trend': """\
truncations: {{ truncations | join(', ') }} ({{ norm }})
{% for power, values in residuals.items() -%}
r_{{ power }}: {% for v in values %}{{ '%.3e' | format(v) }}\
{% if not loop.last %}  {% endif %}{% endfor %} \
[{{ 'nonincreasing' if nonincreasing[power] else 'not monotone' }}]
{% endfor -%}
""",
    'algebraic': """\
moment matrix degree s = {{ degree_s }}
smallest singular value: {{ '%.6e' | format(smallest_singular_value) }}
largest singular value: {{ '%.6e' | format(largest_singular_value) }}
{% if polynomial -%}
kernel polynomial: {{ polynomial }}
{% else -%}
no kernel polynomial below the threshold
{% endif -%}
""",
    'batch': """\
{% for c in coordinates -%}
coordinate {{ c.coordinate }}: {{ c.verdict }} \
(max residual {{ '%.3e' | format(c.max_residual) }})
{% endfor -%}
overall: {{ verdict }}
""",
}


def render_summary(name, context):
    return Template(SUMMARIES[name], keep_trailing_newline=True).render(
        context)
