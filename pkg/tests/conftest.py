import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import cmt
import nanosphere
import quantum

@pytest.fixture
def fig2_params():
  return cmt.CmtParams()

@pytest.fixture
def sphere():
  return nanosphere.SphereSystem()

@pytest.fixture
def qp():
  return quantum.QuantumParams()

@pytest.fixture
def space():
  return quantum.build_space(2, 2)
