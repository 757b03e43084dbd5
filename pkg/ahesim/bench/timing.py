""" Wall-clock timing of Python callables. """
import dataclasses
import statistics
import time
from typing import Callable, List, Optional, Sequence

import psutil


class Timer:
    """ Time consecutive regions with the monotonic clock.

        :param n: the number of regions.
    """
    def __init__(self, n: int):
        self.stamps = [0] * (n + 1)
        self.cur = 0

    def start(self):
        """ Start timing the first region. """
        self.stamps[0] = time.perf_counter_ns()
        self.cur = 1

    def next(self):
        """ Finish the current region and start the next one. """
        if self.cur >= len(self.stamps):
            raise RuntimeError('Trying to time too many regions')
        self.stamps[self.cur] = time.perf_counter_ns()
        self.cur += 1

    def end(self):
        if self.cur != len(self.stamps):
            raise RuntimeError('Called end too early')

    def get_times(self) -> List[float]:
        """ Return measured time for each region, in ms. """
        return [(self.stamps[i] - self.stamps[i - 1]) / 1e6
                for i in range(1, len(self.stamps))]


def time_one(funcs: Sequence[Callable[[], object]],
             timer: Optional[Timer] = None) -> List[float]:
    """ Run and time a single iteration of funcs.

        :param timer: an already existing instance of :class:`Timer`. If ``None``, one will be created.
        :return: the time, in ms, of each function in funcs.
    """
    if timer is None:
        timer = Timer(len(funcs))
    timer.start()
    for f in funcs:
        f()
        timer.next()
    timer.end()
    return timer.get_times()


def time_funcs(funcs: Sequence[Callable[[], object]],
               num_iters: int = 11,
               warmups: int = 2) -> List[List[float]]:
    """ Run and time funcs.

        :param funcs: the functions to time; each iteration calls all of them in order.
        :param num_iters: the number of timed iterations.
        :param warmups: the number of discarded warmup iterations.
        :return: the time, in ms, of each function in funcs on each iteration.
    """
    timer = Timer(len(funcs))
    for _ in range(warmups):
        for f in funcs:
            f()
    times = [list() for _ in range(len(funcs))]
    for _ in range(num_iters):
        for i, t in enumerate(time_one(funcs, timer=timer)):
            times[i].append(t)
    return times


@dataclasses.dataclass(frozen=True)
class TimingStats:
    """ Dispersion of repeated timings, in ms. """
    min_ms: float
    median_ms: float
    max_ms: float
    reps: int

    @classmethod
    def of(cls, times: Sequence[float]) -> "TimingStats":
        if len(times) == 0:
            raise ValueError("No timings to summarize")
        return cls(min_ms=min(times),
                   median_ms=statistics.median(times),
                   max_ms=max(times),
                   reps=len(times))

    def scaled(self, factor: float) -> "TimingStats":
        return TimingStats(min_ms=self.min_ms * factor,
                           median_ms=self.median_ms * factor,
                           max_ms=self.max_ms * factor,
                           reps=self.reps)


class MemorySampler:
    """ Tracks the largest resident set size seen across calls to :meth:`sample`. """
    def __init__(self):
        self._process = psutil.Process()
        self.peak_bytes = 0
        self.sample()

    def sample(self) -> int:
        info = self._process.memory_info()
        # peak_wset is only reported on Windows
        rss = max(info.rss, getattr(info, "peak_wset", 0))
        self.peak_bytes = max(self.peak_bytes, rss)
        return rss
