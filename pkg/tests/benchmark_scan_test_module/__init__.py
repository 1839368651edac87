from slcp import benchmark
from tests.benchmark_scan_test_module._builders import tiny
from tests.benchmark_scan_test_module.file_module import file_builder_exposed


@benchmark("root", description="root module builder", order=1)
def root_builder():
    return tiny("root")


def root_helper():
    return tiny("helper")
