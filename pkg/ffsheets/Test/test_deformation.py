#   Copyright (c) 2026 ffsheets developers
#  #
#   This module is part of ffsheets.
#  #
#   ffsheets is licensed under the BSD-3-Clause license.
#   For further information see LICENSE in the project's root directory.
#

import numpy as np
import pytest

from ffsheets.exceptions import DomainError
from ffsheets.Model.Contour import ContourSpec, build_contour
from ffsheets.Deformation import build_H_gamma, classify, deformed_spectrum, transition_kernel, \
    apply_deformed_resolvent, deformation_resonances, gamma_independence_check, convergence_study
from ffsheets.Test.reference import closed_D, closed_D_continued, Z_RESONANCE, E_BOUND

LAM, MU = 0.3, -0.2


def test_resonance_uncovered_by_the_dip(resonant_kernel, dip):
    spectrum = deformed_spectrum(resonant_kernel, dip)
    assert spectrum.node_count == 96
    assert spectrum.tau == pytest.approx(5 * np.pi / 96)
    assert len(spectrum.resonances) == 1
    assert abs(spectrum.resonances[0] - Z_RESONANCE) <= 1e-6
    frame = spectrum.to_frame()
    assert list(frame.columns) == ["re", "im", "classification", "distance"]
    assert len(frame) == 96


def test_real_segment_uncovers_nothing(resonant_kernel, real_segment):
    spectrum = deformed_spectrum(resonant_kernel, real_segment)
    assert len(spectrum.resonances) == 0
    assert set(spectrum.classification) == {"near_contour"}


def test_zero_kernel_spectrum_is_the_contour(zero_kernel, dip):
    spectrum = deformed_spectrum(zero_kernel, dip)
    assert np.allclose(np.sort_complex(spectrum.eigenvalues), np.sort_complex(dip.nodes),
                       atol=1e-14)
    assert set(spectrum.classification) == {"near_contour"}


def test_bound_state_is_isolated_real(binding_kernel, dip):
    spectrum = deformed_spectrum(binding_kernel, dip)
    assert len(spectrum.bound_states) == 1
    assert spectrum.bound_states[0].real == pytest.approx(E_BOUND, abs=1e-7)


def test_classify(dip):
    values = np.array([0.2 - 0.5j, E_BOUND + 0j, dip.nodes[40], 0.5 + 0.5j])
    labels, distances, tau = classify(dip, values)
    assert labels == ("isolated_in_region", "isolated_real", "near_contour",
                      "isolated_offregion")
    assert distances[2] == pytest.approx(0, abs=1e-12)
    assert tau == pytest.approx(0.1636, abs=1e-4)


def test_select_rejects_unknown_class(zero_kernel, dip):
    with pytest.raises(ValueError):
        deformed_spectrum(zero_kernel, dip).select("resonance")


def test_hamiltonian_shape(coupled_kernel, real_segment):
    assert build_H_gamma(coupled_kernel, real_segment).shape == (128, 128)


def test_contour_independence(resonant_kernel, dip, deep_dip):
    report = gamma_independence_check(resonant_kernel, dip, deep_dip)
    assert report.pairs
    assert report.max_distance() <= 1e-5
    paired = [p.z_a for p in report.pairs] + [p.z_b for p in report.pairs]
    assert min(abs(z - Z_RESONANCE) for z in paired) <= 1e-6
    assert {label for p in report.pairs for label in p.detectors} == {"gamma1", "gamma2"}


def test_contour_independence_needs_one_half_plane(resonant_kernel, dip, real_segment):
    upper = build_contour(ContourSpec.elliptic_dip(1.0, sign=1, nodes=96), -1, 1,
                          resonant_kernel.region)
    with pytest.raises(DomainError):
        gamma_independence_check(resonant_kernel, dip, upper)
    with pytest.raises(DomainError):
        gamma_independence_check(resonant_kernel, real_segment, dip)


def test_transition_kernel_outside_the_region_is_physical(resonant_kernel, dip):
    z = 0.3 + 0.5j
    t = transition_kernel(resonant_kernel, dip, z, [LAM], [MU])
    assert t.shape == (1, 1, 1, 1)
    expected = 0.4 * (1 - LAM ** 2) * (1 - MU ** 2) / closed_D(z, 0.4)
    assert t[0, 0, 0, 0] == pytest.approx(expected, rel=1e-9)


def test_transition_kernel_inside_the_region_is_continued(resonant_kernel, dip):
    z = 0.2 - 0.5j
    t = transition_kernel(resonant_kernel, dip, z, [LAM], [MU])
    expected = 0.4 * (1 - LAM ** 2) * (1 - MU ** 2) / closed_D_continued(z, 0.4)
    assert t[0, 0, 0, 0] == pytest.approx(expected, rel=1e-9)


@pytest.mark.parametrize("z", [0.4 + 0.6j, 0.1 - 0.4j])
def test_deformed_resolvent(resonant_kernel, dip, z):
    rng = np.random.default_rng(2)
    f = rng.normal(size=96) + 1j * rng.normal(size=96)
    r = apply_deformed_resolvent(resonant_kernel, dip, z, f)
    h = build_H_gamma(resonant_kernel, dip)
    assert np.linalg.norm(h @ r - z * r - f) <= 1e-8 * np.linalg.norm(f)
    with pytest.raises(DomainError):
        apply_deformed_resolvent(resonant_kernel, dip, z, f[:50])


def test_deformation_resonances(resonant_kernel, dip):
    found = deformation_resonances(deformed_spectrum(resonant_kernel, dip), resonant_kernel)
    assert len(found) == 1
    assert found[0].sheet == -1
    assert found[0].detector == "deformation"
    assert found[0].abs_det_S <= 1e-6


def test_convergence_study(resonant_kernel):
    spec = ContourSpec.elliptic_dip(1.0, sign=-1, nodes=96)
    frame = convergence_study(resonant_kernel, spec, [96, 128], [Z_RESONANCE])
    assert list(frame.columns) == ["nodes", "reference_re", "reference_im", "re", "im", "error",
                                   "order"]
    assert list(frame["nodes"]) == [96, 128]
    assert (frame["error"] <= 1e-6).all()
    assert np.isnan(frame["order"].iloc[0])


@pytest.mark.slow
def test_convergence_at_high_node_count(resonant_kernel):
    spec = ContourSpec.elliptic_dip(1.0, sign=-1, nodes=96)
    frame = convergence_study(resonant_kernel, spec, [256], [Z_RESONANCE])
    assert frame["error"].iloc[0] <= 1e-7
