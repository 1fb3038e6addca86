#pragma once

#include <gmpxx.h>

#include "iwa/signed.hpp"

namespace iwa::testing {

// Integral element with independent random coefficients in every tame slot.
inline IwasawaElement random_bounded(const Precision& pr, gmp_randclass& g) {
    IwasawaElement e = IwasawaElement::zero(pr);
    mpz_class m = pow_ui(pr.p, pr.M);
    for (int i = 0; i < pr.p - 1; ++i) {
        std::vector<mpz_class> c(pr.N);
        for (auto& x : c) x = g.get_z_range(m);
        e = e.with_component(i, Series::from_ints(pr.p, c, 0, pr.M));
    }
    return e;
}

inline SignedQuadruple random_quadruple(const Precision& pr, gmp_randclass& g, bool with_circ = true) {
    SignedQuadruple s{random_bounded(pr, g), random_bounded(pr, g), random_bounded(pr, g),
                      with_circ ? random_bounded(pr, g) : IwasawaElement::zero(pr)};
    return s;
}

inline SignedQuadruple zero_quadruple(const Precision& pr) {
    IwasawaElement z = IwasawaElement::zero(pr);
    return {z, z, z, z};
}

}  // namespace iwa::testing
