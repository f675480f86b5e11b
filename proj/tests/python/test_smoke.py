# Copyright 2026 The lcsctl authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
# https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""End-to-end smoke tests for the python bindings."""

import math

import numpy as np
import pytest

import lcsctl


def cartpole():
    return lcsctl.benchmark("cartpole")


def test_benchmark_names():
    names = lcsctl.benchmark_names()
    assert names == ["cartpole", "three_carts", "acrobot"]


def test_model_dimensions():
    model = cartpole().lcs
    assert (model.n, model.k, model.m) == (4, 1, 2)
    assert model.A[2, 1] == pytest.approx(4.905)
    assert model.validate() == ""


def test_contact_force_inactive_at_origin():
    model = cartpole().lcs
    lam = model.contact_force(np.zeros(4))
    assert np.allclose(lam, 0.0)


def test_gamma_bound_matches_closed_form():
    model = cartpole().lcs
    gamma = lcsctl.gamma_bound(model.E, model.F)
    assert gamma == pytest.approx(math.sqrt(250.0), rel=1e-9)


def test_lqr_gain_stabilizes_double_integrator():
    A = np.array([[0.0, 1.0], [0.0, 0.0]])
    B = np.array([[0.0], [1.0]])
    K = lcsctl.lqr_gain(A, B, np.eye(2), np.eye(1))
    eigs = np.linalg.eigvals(A + B @ K)
    assert np.all(eigs.real < 0)


def test_simulate_records_header_row():
    spec = cartpole()
    ctrl = lcsctl.lqr_baseline(spec)
    traj = lcsctl.simulate(spec.lcs, ctrl, np.array([0.05, 0.0, 0.1, 0.0]),
                           1.0, 1e-3)
    assert not traj.diverged
    assert traj.times[0] == 0.0
    assert len(traj.times) == 1001
    assert len(traj.states) == len(traj.forces) == len(traj.inputs)


def test_certificate_eval_matches_quadratic_form():
    cert = lcsctl.PwqCertificate()
    cert.P = 2.0 * np.eye(2)
    cert.Q = np.zeros((2, 1))
    cert.R = np.zeros((1, 1))
    x = np.array([1.0, -1.0])
    assert lcsctl.eval_v(cert, x, np.zeros(1)) == pytest.approx(4.0)


def test_synthesize_contact_free_system():
    model = lcsctl.LcsModel()
    model.A = np.array([[0.0, 1.0], [0.0, 0.0]])
    model.B = np.array([[0.0], [1.0]])
    model.D = np.zeros((2, 0))
    model.E = np.zeros((0, 2))
    model.F = np.zeros((0, 0))
    model.c = np.zeros(0)
    opts = lcsctl.SynthesisOptions()
    opts.max_alternations = 5
    result = lcsctl.synthesize(model, opts)
    assert result.status == "Feasible"
    eigs = np.linalg.eigvals(model.A + model.B @ result.controller.K)
    assert np.all(eigs.real < 0)
    assert np.all(np.linalg.eigvalsh(result.certificate.P) > 0)


def test_model_round_trip(tmp_path):
    model = cartpole().lcs
    path = str(tmp_path / "model.json")
    lcsctl.write_model(path, model)
    back = lcsctl.read_model(path)
    assert np.array_equal(back.A, model.A)
    assert np.array_equal(back.F, model.F)
    assert np.array_equal(back.c, model.c)
