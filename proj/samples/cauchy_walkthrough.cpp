// Binary expansion of 1 (0.111...), its Cauchy witness table, and the same
// sequence seen from a Hadamard frame.
#include <iostream>

#include "qframe/qframe.hpp"

int main() {
    using namespace qframe;
    auto x = parse_canonical("1001-0111");
    std::cout << format(x) << " = " << value(x).to_decimal() << '\n';

    auto seq = fseq_sequence(BitFunction::periodic(0, "1"));
    auto plain = check_cauchy_basis(seq, 6, 32);
    std::cout << "plain: " << verdict_name(plain) << '\n';
    for (const auto& w : plain.witnesses) std::cout << "  ell " << w.ell << "  h " << (w.h ? *w.h : -1) << '\n';

    auto u = GaugeTransform::global(Mat2::hadamard_su2()).with_identity_sign();
    auto gauged = check_cauchy_gauged(seq, u, 6, 32);
    std::cout << "U frame: " << verdict_name(gauged) << (same_witnesses(plain, gauged) ? " (same table)" : "") << '\n';

    auto seen = prob_cauchy(seq.gauged(u), 4, 3, 2, kDefaultSupportCap);
    std::cout << "original relations on the gauged terms: P estimate " << *seen.estimate << '\n';
}
