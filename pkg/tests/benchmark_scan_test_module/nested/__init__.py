from slcp import benchmark
from tests.benchmark_scan_test_module._builders import tiny


@benchmark("nested", order=0)
def nested_builder():
    return tiny("nested")
