import io
import json
import os

import pytest
import yaml

from trajcheck import VERSION
from trajcheck.detector import check_trajectory, residual_trend
from trajcheck.errors import InputError
from trajcheck.moments import MomentTable
from trajcheck.report import atomic_write, build_report, dump_structured, \
    input_digest, render_summary, report_format


def test_input_digest():
    digest = input_digest(b'abc')
    assert digest == ('sha256:ba7816bf8f01cfea414140de5dae2223b00361a396177a'
                      '9cb410ff61f20015ad')
    assert input_digest('abc') == digest


def test_build_report_header():
    report = build_report({'verdict': 'x'}, 'sha256:00')
    assert report == {'tool': 'trajcheck', 'version': VERSION,
                      'input_digest': 'sha256:00', 'verdict': 'x'}


def test_build_report_stamp():
    report = build_report({}, 'sha256:00', stamp=True)
    assert 'generated_at' in report


def test_report_is_deterministic(identity_table):
    body = check_trajectory(identity_table, 1, 2, 1e-9).to_dict()
    outputs = []
    for _ in range(2):
        buf = io.StringIO()
        dump_structured(build_report(body, 'sha256:00'), buf, 'yaml')
        outputs.append(buf.getvalue())
    assert outputs[0] == outputs[1]
    assert 'generated_at' not in outputs[0]


@pytest.mark.parametrize('fmt,load', [('json', json.loads),
                                      ('yaml', yaml.safe_load)])
def test_dump_structured(fmt, load, identity_table):
    body = check_trajectory(identity_table, 1, 2, 1e-9).to_dict()
    buf = io.StringIO()
    dump_structured(body, buf, fmt)
    loaded = load(buf.getvalue())
    assert loaded['verdict'] == 'trajectory_consistent'
    assert loaded['residuals'][0]['compared_length'] == 3


def test_dump_structured_unknown_format():
    with pytest.raises(InputError):
        dump_structured({}, io.StringIO(), 'xml')


@pytest.mark.parametrize('path,fmt', [('r.json', 'json'), ('r.JSON', 'json'),
                                      ('r.yml', 'yaml'), ('r', 'yaml')])
def test_report_format(path, fmt):
    assert report_format(path) == fmt


def test_atomic_write(tmpdir):
    path = str(tmpdir.join('out.csv'))
    atomic_write(path, lambda f: f.write('a,b\n'))
    with open(path) as f:
        assert f.read() == 'a,b\n'
    assert os.listdir(str(tmpdir)) == ['out.csv']


def test_atomic_write_failure_leaves_nothing(tmpdir):
    path = str(tmpdir.join('out.csv'))

    def broken(f):
        f.write('partial')
        raise RuntimeError('boom')

    with pytest.raises(RuntimeError):
        atomic_write(path, broken)
    assert os.listdir(str(tmpdir)) == []


def test_atomic_write_keeps_previous_file(tmpdir):
    path = tmpdir.join('out.csv')
    path.write('old')

    with pytest.raises(KeyError):
        atomic_write(str(path), lambda f: {}['x'])
    assert path.read() == 'old'


def test_render_check_summary(product_table):
    report = check_trajectory(product_table, 1, 2, 1e-3)
    text = render_summary('check', report.to_dict())
    assert 'r_2 = 8.333333e-02 over 3 coefficients' in text
    assert text.endswith('verdict: inconsistent\n')


def test_render_downgraded_check_summary():
    # x(t) = t^2; its linear projection dips below zero near t = 0
    gamma = [[1.0 / (2 * i + j + 1) for j in range(3)] for i in range(3)]
    report = check_trajectory(MomentTable.build(gamma), 1, 2, 1.0)
    text = render_summary('check', report.to_dict())
    assert text.endswith(
        'verdict: inconclusive (downgraded from trajectory_consistent)\n')


def test_render_trend_summary(product_table):
    trend = residual_trend(product_table, [0, 1], 2)
    text = render_summary('trend', trend.to_dict())
    assert text.startswith('truncations: 0, 1 (l2)')
    assert 'r_2: 8.333e-02  8.333e-02 [nonincreasing]' in text


def test_render_batch_summary():
    context = {'coordinates': [{'coordinate': 0, 'verdict': 'inconsistent',
                                'max_residual': 0.25}],
               'verdict': 'inconsistent'}
    text = render_summary('batch', context)
    assert text == ('coordinate 0: inconsistent (max residual 2.500e-01)\n'
                    'overall: inconsistent\n')
