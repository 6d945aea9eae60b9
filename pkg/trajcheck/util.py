import json
from collections.abc import Iterable, Mapping
from concurrent.futures import ThreadPoolExecutor

import numpy as np


class FrozenDict(Mapping):
    def __init__(self, *args, **kwargs):
        self._data = dict(*args, **kwargs)
        self._hash = None

    def __getitem__(self, key):
        return self._data[key]

    def __len__(self):
        return len(self._data)

    def __iter__(self):
        return iter(self._data)

    def __hash__(self):
        if not self._hash:
            self._hash = hash(frozenset(self._data.items()))

        return self._hash

    def __repr__(self):
        return '{}({})'.format(type(self).__name__, repr(self._data))

    def __eq__(self, other):
        if isinstance(other, type(self)):
            return self._data == other._data
        elif isinstance(other, Mapping):
            return self._data == other


class JSONEncoder(json.JSONEncoder):
    def default(self, o):
        if isinstance(o, FrozenDict):
            return dict(o)
        elif isinstance(o, np.ndarray):
            return o.tolist()
        elif isinstance(o, np.integer):
            return int(o)
        elif isinstance(o, np.floating):
            return float(o)
        elif isinstance(o, tuple):
            return list(o)

        return super(JSONEncoder, self).default(o)


def plain(obj):
    if isinstance(obj, Mapping):
        return {k: plain(v) for (k, v) in obj.items()}
    elif isinstance(obj, np.ndarray):
        return [plain(v) for v in obj.tolist()]
    elif isinstance(obj, np.integer):
        return int(obj)
    elif isinstance(obj, np.floating):
        return float(obj)
    elif is_collection(obj):
        return [plain(v) for v in obj]
    else:
        return obj


def is_collection(v):
    return isinstance(v, Iterable) and not isinstance(v, (bytes, str))


def deep_merge(left, right):
    """
    Merge `right` into a copy of `left`. Nested mappings are merged key by
    key; any other value in `right` replaces the one in `left`.
    """
    if not isinstance(left, Mapping):
        return right
    if not isinstance(right, Mapping):
        raise ValueError('Cannot merge Mapping and non-Mapping')

    res = dict(left)
    for k, right_v in right.items():
        if k in res:
            res[k] = deep_merge(res[k], right_v)
        else:
            res[k] = right_v

    return res


def frozen_array(values, dtype=float):
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


def parallel_map(fn, items, workers=0):
    """
    Apply `fn` to every item, in a thread pool when `workers` > 0.

    Results are returned in input order whatever the completion order.
    """
    items = list(items)
    if not workers or len(items) < 2:
        return [fn(item) for item in items]

    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(fn, items))
