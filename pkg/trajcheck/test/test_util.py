import json
import threading
import time

import numpy as np
import pytest

from trajcheck.util import FrozenDict, JSONEncoder, deep_merge, \
    frozen_array, is_collection, parallel_map, plain


@pytest.mark.parametrize('obj,is_coll', [
    ([], True),
    (set(), True),
    (dict(), True),
    ('str', False),
    (b'bytes', False),
    (np.zeros(2), True),
    (range(5), True)
])
def test_is_collection(obj, is_coll):
    assert is_collection(obj) == is_coll


def test_frozen_dict():
    d = FrozenDict({'a': 1, 'b': (2, 3)})
    assert d == FrozenDict(a=1, b=(2, 3))
    assert d == {'a': 1, 'b': (2, 3)}
    assert not d == [('a', 1)]
    assert hash(d) == hash(FrozenDict(b=(2, 3), a=1))
    assert {d: 1}[FrozenDict(a=1, b=(2, 3))] == 1
    assert repr(d) == "FrozenDict({'a': 1, 'b': (2, 3)})"
    with pytest.raises(TypeError):
        d['a'] = 2


@pytest.mark.parametrize('left,right,merged', [
    # two scalars = right scalar
    (1, 2, 2),
    # two dicts = merge
    ({'a': 1}, {'b': 2}, {'a': 1, 'b': 2}),
    # two dicts with same key = merge key
    ({'a': 1}, {'a': 2}, {'a': 2}),
    # nested dicts = merge nested
    ({'a': {'1': 1}},
     {'a': {'2': 2}},
     {'a': {'1': 1, '2': 2}}),
    # lists are replaced, not concatenated
    ({'a': [1]}, {'a': [2]}, {'a': [2]}),
    # frozen mappings merge into plain dicts
    (FrozenDict({'a': 1}), {'b': 2}, {'a': 1, 'b': 2}),
    # mapping and non-mapping
    ({}, [], None)
])
def test_deep_merge(left, right, merged):
    if merged is not None:
        assert deep_merge(left, right) == merged
    else:
        with pytest.raises(ValueError):
            deep_merge(left, right)


def test_deep_merge_no_mutation():
    left = {'a': {'b': 1}}
    deep_merge(left, {'a': {'c': 2}})
    assert left == {'a': {'b': 1}}


def test_frozen_array():
    arr = frozen_array([1, 2])
    assert arr.dtype == float
    with pytest.raises(ValueError):
        arr[0] = 3.0


def test_plain():
    obj = FrozenDict({'a': np.arange(3), 'b': (np.float64(0.5), np.int64(2))})
    assert plain(obj) == {'a': [0, 1, 2], 'b': [0.5, 2]}
    assert type(plain(obj)['b'][1]) is int


def test_json_encoder():
    obj = {'a': np.array([0.5]), 'b': np.int32(3), 'c': FrozenDict({'x': 1})}
    assert json.loads(json.dumps(obj, cls=JSONEncoder)) == \
        {'a': [0.5], 'b': 3, 'c': {'x': 1}}


@pytest.mark.parametrize('workers', [0, 1, 4])
def test_parallel_map_preserves_order(workers):
    def slow_square(x):
        # Later items finish first
        time.sleep(0.001 * (5 - x))
        return x * x

    assert parallel_map(slow_square, range(5), workers) == [0, 1, 4, 9, 16]


def test_parallel_map_uses_threads():
    seen = set()

    def record(_):
        seen.add(threading.get_ident())
        time.sleep(0.01)

    parallel_map(record, range(8), workers=4)
    assert len(seen) > 1


def test_parallel_map_propagates_errors():
    def fail(x):
        if x == 2:
            raise KeyError(x)
        return x

    with pytest.raises(KeyError):
        parallel_map(fail, range(4), workers=2)
