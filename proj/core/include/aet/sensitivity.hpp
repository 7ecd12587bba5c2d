#pragma once

#include "aet/fem.hpp"
#include "aet/forward.hpp"

#include <cstddef>

namespace aet {

// Linearization of the power-density map and its adjoint.
//
// The derivative is the exact derivative of the discrete forward map
//   F(sigma)_j = D^-1 Q(|grad u_j|^2) sigma,
// Q(c) being the c-weighted mass matrix (c piecewise constant) and D the lumped mass.
// The adjoint is its exact transpose with
// respect to the mass-weighted data pairing and the Gram matrix of the domain inner
// product, so <F'h, w>_data = <h, F'* w>_G holds up to solver round-off.

/// Zero-mean u' with  int sigma grad u' . grad v = -int h grad u_j . grad v  for all v.
NodalField linearized_potential(const ForwardState& state, std::size_t j, const NodalField& h);

/// F'(sigma) h, one vertex field per measurement:
/// D^-1 (Q(|grad u_j|^2) h + Q(2 grad u_j . grad u'_j) sigma).
DataField derivative_apply(const ForwardState& state, const NodalField& h);

/// Adjoint state of measurement j: zero-mean a with
///   int sigma grad a . grad v = -sum_T p_T grad u_j . grad v|_T,
/// where p_T = int_T z sigma and z = D^-1 M w (z = c for a constant w = c).
NodalField adjoint_state(const ForwardState& state, std::size_t j, const NodalField& w);

/// L2 functional of F'(sigma)* w before the Riesz map:
///   r = sum_j Q(|grad u_j|^2) z_j + sum_T (1/3)[i in T] 2 area_T grad u_j . grad a_j.
Vector adjoint_functional(const ForwardState& state, const DataField& w);

/// F'(sigma)* w in the inner product of `riesz`: G^-1 times adjoint_functional.
NodalField adjoint_apply(const ForwardState& state, const DataField& w,
                         const EmbeddingAdjoint& riesz);

/// Stacked, mass-weighted data inner product sum_j a_j^T M b_j.
double data_inner(const FemSpace& space, const DataField& a, const DataField& b);
double data_norm(const FemSpace& space, const DataField& a);

DataField data_difference(const DataField& a, const DataField& b);
DataField data_scaled(const DataField& a, double factor);

}  // namespace aet
