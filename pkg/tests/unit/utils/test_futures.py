import threading

from ultralab.utils.futures import map_rows


def test_map_rows__serial():
    assert map_rows(lambda x: x * x, range(5)) == [0, 1, 4, 9, 16]


def test_map_rows__threads_keep_order():
    seen = set()

    def fun(x):
        seen.add(threading.get_ident())
        return -x

    assert map_rows(fun, range(50), workers=4) == [-x for x in range(50)]
    assert seen


def test_map_rows__empty():
    assert map_rows(lambda x: x, [], workers=4) == []
