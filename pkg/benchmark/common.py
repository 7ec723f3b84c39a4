import pathlib
from abc import ABC, abstractmethod
from typing import Any, Type

import numpy as np
import pyperf

RESULTS_DIR = pathlib.Path(__file__).parent / "results"


class AbstractBenchmark(ABC):
    NAME: str

    def __init__(self, runner: pyperf.Runner) -> None:
        self.runner = runner

    @abstractmethod
    def setup(self, rng: np.random.Generator) -> Any:
        pass

    @abstractmethod
    def run(self, data: Any) -> pyperf.Benchmark:
        pass

    def warmup(self, data: Any) -> None:
        pass

    def _bench_func(self, func, *args, **kwargs) -> pyperf.Benchmark:
        return self.runner.bench_func(self.NAME, func, *args, **kwargs)


class BenchmarkRunner:
    def __init__(
        self, benchmark_cls: Type[AbstractBenchmark], seed: int = 0
    ) -> None:
        self._runner = pyperf.Runner()
        self._benchmark = benchmark_cls(self._runner)
        self._data = self._benchmark.setup(np.random.default_rng(seed))

    def run(self) -> None:
        self._benchmark.warmup(self._data)
        self._benchmark.run(self._data)
