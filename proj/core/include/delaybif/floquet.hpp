#pragma once

// Floquet multipliers of a periodic orbit: the variational equation
//
//   v'(s) = T [ J(s) v(s) + B v(s - tau/T) ],  J = [[0, 1], [-cos(y), -a]],  B = [[0, 0], [0, -atilde]]
//
// is collocated over one period on the orbit's mesh, with the history on
// [-tau/T, 0] represented on shifted copies of the same mesh. The resulting
// finite-dimensional monodromy matrix maps history to history.

#include <complex>
#include <vector>

#include "delaybif/periodic.hpp"

namespace delaybif {

using Complex = std::complex<double>;

enum class OrbitStability { Stable, Unstable };

struct FloquetSpectrum {
    std::vector<Complex> multipliers;  ///< decreasing modulus, closed under conjugation
    int trivial_index = -1;            ///< multiplier nearest 1
    int unstable_count = 0;            ///< |mu| > 1 excluding the trivial one
    OrbitStability stability = OrbitStability::Stable;
    int dimension = 0;                 ///< size of the discretised monodromy matrix

    Complex trivial() const { return multipliers.at(trivial_index); }
    double trivial_error() const { return std::abs(trivial() - 1.0); }
    /// Multipliers without the trivial one.
    std::vector<Complex> nontrivial() const;
};

struct FloquetOptions {
    int count = 10;
    double trivial_tol = 1e-2;  ///< accuracy failure above this distance from 1
    int dense_limit = 400;      ///< matrix sizes up to this use a dense eigensolver
};

/// The `count` largest multipliers. Throws NumericalFailure if the trivial
/// multiplier is farther than trivial_tol from 1.
FloquetSpectrum floquet_multipliers(const PeriodicOrbit& orbit, const FloquetOptions& opts = {});
FloquetSpectrum floquet_multipliers(const PeriodicOrbit& orbit, int count);

/// Real eigenfunction of the multiplier nearest `target` over one period, at
/// the orbit's representation points, scaled to unit sup norm.
struct FloquetMode {
    Complex multiplier;
    std::vector<State> values;  ///< at s = rep_point(p)
    State at_end{};             ///< value at s = 1, equals multiplier * values[0]
};

FloquetMode floquet_mode(const PeriodicOrbit& orbit, Complex target, const FloquetOptions& opts = {});

}  // namespace delaybif
