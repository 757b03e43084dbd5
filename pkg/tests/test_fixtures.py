"""
Test our pytest fixtures using pytester
"""


def test_slow_marker(pytester):
    pytester.copy_example("tests/conftest.py")
    pytester.makepyfile("""
    import pytest
    @pytest.mark.slow
    def test_slow():
        pass
    """)
    pytester.runpytest().assert_outcomes(skipped=1)
    pytester.runpytest("--full-scale").assert_outcomes(passed=1)


def test_bench_marker(pytester):
    pytester.copy_example("tests/conftest.py")
    pytester.makepyfile("""
    import pytest
    @pytest.mark.bench
    def test_bench():
        pass
    """)
    pytester.runpytest().assert_outcomes(passed=1)
    pytester.runpytest("--skip-bench").assert_outcomes(skipped=1)


def test_full_scale_fixture(pytester):
    pytester.copy_example("tests/conftest.py")
    pytester.makepyfile("""
    def test_scale(full_scale):
        assert full_scale
    """)
    pytester.runpytest().assert_outcomes(failed=1)
    pytester.runpytest("--full-scale").assert_outcomes(passed=1)


def test_keypair_fixture_is_deterministic(pytester):
    pytester.copy_example("tests/conftest.py")
    pytester.makepyfile("""
    def test_key(keypair, other_keypair):
        assert keypair.public.bits == 512
        assert keypair.key_id != other_keypair.key_id
    """)
    pytester.runpytest().assert_outcomes(passed=1)
