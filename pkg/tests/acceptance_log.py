"""Shared record of acceptance outcomes, printed at the end of the session."""

import functools
import time

RESULTS: dict[int, str] = {}


def criterion(number: int, title: str):
    def wrap(fn):
        @functools.wraps(fn)
        def inner(*args, **kwargs):
            t0 = time.perf_counter()
            try:
                detail = fn(*args, **kwargs)
            except BaseException as exc:
                line = f"[{number:2d}] FAIL  {title}: {type(exc).__name__}: {str(exc).splitlines()[0] if str(exc) else ''}"
                RESULTS[number] = line
                print(line)
                raise
            line = f"[{number:2d}] PASS  {title} ({time.perf_counter() - t0:.1f}s){': ' + detail if detail else ''}"
            RESULTS[number] = line
            print(line)

        return inner

    return wrap
