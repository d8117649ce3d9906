import pytest

from checkerboard.suite import PROFILES, run_suite


@pytest.mark.parametrize("profile", PROFILES)
def test_profiles_pass(profile):
    checks = run_suite(profile, seed=3)
    failed = [c.name for c in checks if not c.passed]
    assert not failed
    assert len({c.name for c in checks}) == len(checks)


def test_unknown_profile():
    with pytest.raises(ValueError):
        run_suite("huge")
