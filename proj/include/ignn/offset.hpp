#pragma once

#include <string>
#include <vector>

#include "ignn/linalg.hpp"

namespace ignn {

// Form of the input offset b_Omega(U) for one relation:
//   omega_ua:   Omega U A
//   omega_u:    Omega U
//   both:       Omega_1 U A + Omega_2 U
enum class BForm { omega_ua, omega_u, both };

std::string to_string(BForm f);
BForm parse_bform(const std::string& text);
inline bool uses_ua(BForm f) { return f != BForm::omega_u; }
inline bool uses_u(BForm f) { return f != BForm::omega_ua; }

// Parameters attached to one relation of an equilibrium layer. Unused omega
// matrices are left empty (0 x 0).
struct RelationParams {
    DenseMatrix W;        // m x m
    DenseMatrix omega_a;  // m x p, multiplies U A
    DenseMatrix omega_b;  // m x p, multiplies U

    friend bool operator==(const RelationParams&, const RelationParams&) = default;
};

// sum_i b_Omega_i(U) over the relations.
DenseMatrix compute_offset(BForm form, const std::vector<RelationParams>& relations,
                           const std::vector<const SparseAdjacency*>& As, const DenseMatrix& U);

std::vector<DenseMatrix> weights_of(const std::vector<RelationParams>& relations);

}  // namespace ignn
