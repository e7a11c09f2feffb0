from __future__ import annotations

import pytest

from wreathcert import forcing, groups


@pytest.fixture
def free2():
    return groups.make_backend("free:2")


@pytest.fixture
def zd2():
    return groups.make_backend("zd:2")


@pytest.fixture
def s3():
    return groups.preset_table("s3")


@pytest.fixture
def fresh_subset(free2):
    return forcing.ForcedSubset(free2)
