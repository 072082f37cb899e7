#pragma once

#include <nlohmann/json.hpp>

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <iomanip>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "qframe/arithmetic.hpp"
#include "qframe/error.hpp"
#include "qframe/state.hpp"
#include "qframe/superposition.hpp"

namespace qframe {

/// Tolerance for SU(2) membership checks.
inline constexpr double kGroupTolerance = 1e-12;

/// Default limit on the number of terms a gauge expansion may produce.
inline constexpr std::size_t kDefaultSupportCap = std::size_t{1} << 20;

/// 2x2 complex matrix acting on a qubit in the column convention:
/// U|i> = sum_k U(k, i) |k>. On the sign qubit, + and - take the roles of 0 and 1.
struct Mat2 {
    std::array<std::array<Amplitude, 2>, 2> m{};

    Amplitude& operator()(int r, int c) { return m[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)]; }
    const Amplitude& operator()(int r, int c) const {
        return m[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
    }

    static Mat2 identity() { return Mat2{{{{1.0, 0.0}, {0.0, 1.0}}}}; }

    /// Literal Hadamard, H|0> = |+>, H|1> = |->. Unitary with determinant -1.
    static Mat2 hadamard() {
        const double r = 1.0 / std::sqrt(2.0);
        return Mat2{{{{r, r}, {r, -r}}}};
    }

    /// i H: the SU(2) member of the Hadamard's phase class.
    static Mat2 hadamard_su2() {
        const double r = 1.0 / std::sqrt(2.0);
        return Mat2{{{{Amplitude{0, r}, Amplitude{0, r}}, {Amplitude{0, r}, Amplitude{0, -r}}}}};
    }

    /// [[a, -conj(b)], [b, conj(a)]] with |a|^2 + |b|^2 = 1.
    static Mat2 from_unit_quaternion(Amplitude a, Amplitude b) {
        return Mat2{{{{a, -std::conj(b)}, {b, std::conj(a)}}}};
    }

    Amplitude det() const { return m[0][0] * m[1][1] - m[0][1] * m[1][0]; }

    Mat2 adjoint() const {
        Mat2 r;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) r(i, j) = std::conj((*this)(j, i));
        return r;
    }

    friend Mat2 operator*(const Mat2& a, const Mat2& b) {
        Mat2 r;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) r(i, j) = a(i, 0) * b(0, j) + a(i, 1) * b(1, j);
        return r;
    }

    std::array<Amplitude, 2> apply(const std::array<Amplitude, 2>& v) const {
        return {m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]};
    }

    /// Largest entry-wise deviation.
    friend double distance(const Mat2& a, const Mat2& b) {
        double d = 0.0;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) d = std::max(d, std::abs(a(i, j) - b(i, j)));
        return d;
    }

    bool is_unitary(double tol = kGroupTolerance) const { return distance(adjoint() * *this, identity()) <= tol; }
    bool is_special_unitary(double tol = kGroupTolerance) const {
        return is_unitary(tol) && std::abs(det() - Amplitude{1.0, 0.0}) <= tol;
    }

    friend bool operator==(const Mat2&, const Mat2&) = default;
};

/// Haar-random SU(2) element.
template <class Rng>
Mat2 random_su2(Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    double q[4];
    double n = 0.0;
    do {
        n = 0.0;
        for (double& c : q) {
            c = normal(rng);
            n += c * c;
        }
    } while (n < 1e-12);
    n = std::sqrt(n);
    return Mat2::from_unit_quaternion(Amplitude{q[0] / n, q[3] / n}, Amplitude{q[2] / n, q[1] / n});
}

/// Which group the matrices of a gauge must belong to.
enum class Group { su2, u2 };

/// An SU(2)-valued function on the lattice sites.
///
/// Sites not listed take the default matrix (the identity for a plain local
/// transform; the shared matrix for a global one). The sign qubit at site 0
/// uses the site-0 matrix unless an explicit sign matrix is set.
class GaugeTransform {
public:
    GaugeTransform() = default;

    static GaugeTransform identity() { return GaugeTransform(); }

    static GaugeTransform global(const Mat2& u, Group group = Group::su2) {
        GaugeTransform g;
        g.default_ = u;
        g.group_ = group;
        g.validate();
        return g;
    }

    static GaugeTransform local(std::map<std::int64_t, Mat2> sites, Group group = Group::su2) {
        return local(std::move(sites), Mat2::identity(), group);
    }

    /// Listed sites take their own matrix, every other site `background`.
    static GaugeTransform local(std::map<std::int64_t, Mat2> sites, const Mat2& background, Group group) {
        GaugeTransform g;
        g.sites_ = std::move(sites);
        g.default_ = background;
        g.group_ = group;
        g.validate();
        return g;
    }

    /// Copy with a separate matrix for the sign qubit.
    GaugeTransform with_sign(const Mat2& s) const {
        GaugeTransform g = *this;
        g.sign_ = s;
        g.validate();
        return g;
    }

    /// Copy with the sign qubit explicitly left alone.
    GaugeTransform with_identity_sign() const { return with_sign(Mat2::identity()); }

    const Mat2& at(std::int64_t site) const {
        auto it = sites_.find(site);
        return it == sites_.end() ? default_ : it->second;
    }

    const Mat2& sign_matrix() const { return sign_ ? *sign_ : at(0); }
    const Mat2& default_matrix() const noexcept { return default_; }
    const std::map<std::int64_t, Mat2>& sites() const noexcept { return sites_; }
    const std::optional<Mat2>& sign_override() const noexcept { return sign_; }
    Group group() const noexcept { return group_; }

    /// Every site carries the same matrix.
    bool is_global() const noexcept { return sites_.empty(); }

    bool is_identity(double tol = kGroupTolerance) const {
        if (distance(default_, Mat2::identity()) > tol) return false;
        if (sign_ && distance(*sign_, Mat2::identity()) > tol) return false;
        for (const auto& [j, u] : sites_)
            if (distance(u, Mat2::identity()) > tol) return false;
        return true;
    }

    /// Sites whose matrix differs from the default.
    std::vector<std::int64_t> listed_sites() const {
        std::vector<std::int64_t> out;
        for (const auto& [j, u] : sites_) out.push_back(j);
        return out;
    }

    /// Stable identifier: FNV-1a over the matrices rounded to a 1e-12 grid.
    std::string fingerprint() const {
        std::uint64_t h = 1469598103934665603ULL;
        auto mix_bytes = [&h](std::int64_t v) {
            auto u = static_cast<std::uint64_t>(v);
            for (int i = 0; i < 8; ++i) {
                h ^= (u >> (8 * i)) & 0xffU;
                h *= 1099511628211ULL;
            }
        };
        auto mix = [&](const Mat2& u) {
            for (int r = 0; r < 2; ++r)
                for (int c = 0; c < 2; ++c) {
                    mix_bytes(std::llround(u(r, c).real() * 1e12));
                    mix_bytes(std::llround(u(r, c).imag() * 1e12));
                }
        };
        mix(default_);
        mix_bytes(sign_ ? 1 : 0);
        if (sign_) mix(*sign_);
        for (const auto& [j, u] : sites_) {
            if (distance(u, default_) <= 0.5e-12) continue;
            mix_bytes(j);
            mix(u);
        }
        std::ostringstream os;
        os << std::hex << std::setw(16) << std::setfill('0') << h;
        return os.str();
    }

    friend GaugeTransform compose(const GaugeTransform& second, const GaugeTransform& first);
    friend GaugeTransform inverse(const GaugeTransform& u);

private:
    void validate() const {
        auto check = [this](const Mat2& u, const std::string& where) {
            bool ok = group_ == Group::su2 ? u.is_special_unitary() : u.is_unitary();
            if (!ok)
                throw DomainError("gauge matrix at " + where + " is not in " +
                                  (group_ == Group::su2 ? "SU(2)" : "U(2)"));
        };
        check(default_, "default");
        if (sign_) check(*sign_, "sign qubit");
        for (const auto& [j, u] : sites_) check(u, "site " + std::to_string(j));
    }

    std::map<std::int64_t, Mat2> sites_;
    Mat2 default_ = Mat2::identity();
    std::optional<Mat2> sign_;
    Group group_ = Group::su2;
};

/// Sitewise product second * first: acting with the result equals acting
/// with `first` and then with `second`.
inline GaugeTransform compose(const GaugeTransform& second, const GaugeTransform& first) {
    GaugeTransform g;
    g.group_ = (second.group_ == Group::u2 || first.group_ == Group::u2) ? Group::u2 : Group::su2;
    g.default_ = second.default_ * first.default_;
    for (const auto& [j, u] : first.sites_) g.sites_[j] = second.at(j) * u;
    for (const auto& [j, u] : second.sites_)
        if (!first.sites_.count(j)) g.sites_[j] = u * first.default_;
    if (second.sign_ || first.sign_) g.sign_ = second.sign_matrix() * first.sign_matrix();
    return g;
}

inline GaugeTransform inverse(const GaugeTransform& u) {
    GaugeTransform g;
    g.group_ = u.group_;
    g.default_ = u.default_.adjoint();
    for (const auto& [j, m] : u.sites_) g.sites_[j] = m.adjoint();
    if (u.sign_) g.sign_ = u.sign_->adjoint();
    return g;
}

/// Largest matrix deviation between two gauges over the given site range,
/// the sign qubit included.
inline double gauge_distance(const GaugeTransform& a, const GaugeTransform& b, std::int64_t lo, std::int64_t hi) {
    double d = std::max(distance(a.sign_matrix(), b.sign_matrix()), distance(a.default_matrix(), b.default_matrix()));
    for (auto j = lo; j <= hi; ++j) d = std::max(d, distance(a.at(j), b.at(j)));
    for (auto j : a.listed_sites()) d = std::max(d, distance(a.at(j), b.at(j)));
    for (auto j : b.listed_sites()) d = std::max(d, distance(a.at(j), b.at(j)));
    return d;
}

template <class Rng>
GaugeTransform random_local_gauge(Rng& rng, std::int64_t lo, std::int64_t hi) {
    std::map<std::int64_t, Mat2> sites;
    for (auto j = lo; j <= hi; ++j) sites[j] = random_su2(rng);
    return GaugeTransform::local(std::move(sites)).with_sign(random_su2(rng));
}

template <class Rng>
GaugeTransform random_global_gauge(Rng& rng) {
    return GaugeTransform::global(random_su2(rng));
}

// --- product states ------------------------------------------------------------

/// A gauged basis state kept in factored form: one 2-vector per qubit.
///
/// U|gamma, s> is always a product state; this form stays linear in the
/// string length where the expanded superposition grows as 2^sites.
class ProductState {
public:
    using Qubit = std::array<Amplitude, 2>;

    ProductState(Qubit sign, std::int64_t lower, std::vector<Qubit> sites)
        : sign_(sign), lower_(lower), sites_(std::move(sites)) {}

    static ProductState from_basis(const BasisState& x) {
        std::vector<Qubit> sites;
        sites.reserve(x.sites());
        for (auto b : x.bits()) sites.push_back(b ? Qubit{0.0, 1.0} : Qubit{1.0, 0.0});
        Qubit sign = x.sign() == Sign::plus ? Qubit{1.0, 0.0} : Qubit{0.0, 1.0};
        return ProductState(sign, x.lower(), std::move(sites));
    }

    const Qubit& sign() const noexcept { return sign_; }
    std::int64_t lower() const noexcept { return lower_; }
    std::int64_t upper() const noexcept { return lower_ + static_cast<std::int64_t>(sites_.size()) - 1; }
    const std::vector<Qubit>& sites() const noexcept { return sites_; }
    const Qubit& site(std::int64_t j) const { return sites_[static_cast<std::size_t>(j - lower_)]; }

    ProductState transformed(const GaugeTransform& u) const {
        std::vector<Qubit> out;
        out.reserve(sites_.size());
        for (std::size_t i = 0; i < sites_.size(); ++i)
            out.push_back(u.at(lower_ + static_cast<std::int64_t>(i)).apply(sites_[i]));
        return ProductState(u.sign_matrix().apply(sign_), lower_, std::move(out));
    }

    /// <x|this> for a basis state on the same interval.
    Amplitude overlap(const BasisState& x) const {
        if (x.lower() != lower_ || x.upper() != upper()) return {};
        Amplitude a = sign_[x.sign() == Sign::plus ? 0 : 1];
        for (std::size_t i = 0; i < sites_.size(); ++i) a *= sites_[i][x.bits()[i]];
        return a;
    }

    /// Number of qubits whose state is not (numerically) a basis vector.
    std::size_t branching_qubits() const {
        auto branches = [](const Qubit& q) { return std::abs(q[0]) >= kPruneEpsilon && std::abs(q[1]) >= kPruneEpsilon; };
        std::size_t n = branches(sign_) ? 1 : 0;
        for (const auto& q : sites_) n += branches(q) ? 1 : 0;
        return n;
    }

    /// If every qubit is within `tol` of a basis vector, the basis state and
    /// its overall phase.
    std::optional<std::pair<BasisState, Amplitude>> collapse(double tol) const {
        auto pick = [tol](const Qubit& q) -> std::optional<int> {
            if (std::abs(q[1]) <= tol && std::abs(std::abs(q[0]) - 1.0) <= tol) return 0;
            if (std::abs(q[0]) <= tol && std::abs(std::abs(q[1]) - 1.0) <= tol) return 1;
            return std::nullopt;
        };
        auto s = pick(sign_);
        if (!s) return std::nullopt;
        Amplitude phase = sign_[static_cast<std::size_t>(*s)];
        std::vector<std::uint8_t> bits;
        bits.reserve(sites_.size());
        for (const auto& q : sites_) {
            auto b = pick(q);
            if (!b) return std::nullopt;
            phase *= q[static_cast<std::size_t>(*b)];
            bits.push_back(static_cast<std::uint8_t>(*b));
        }
        return std::pair{BasisState(*s == 0 ? Sign::plus : Sign::minus, lower_, upper(), std::move(bits)), phase};
    }

    /// Full expansion into basis terms on the fixed interval.
    StateSuperposition expand(std::size_t cap = kDefaultSupportCap) const {
        auto b = branching_qubits();
        if (b >= 63 || (std::size_t{1} << b) > cap)
            throw ResourceError("gauge expansion needs 2^" + std::to_string(b) + " terms", cap);
        std::vector<std::pair<std::vector<std::uint8_t>, Amplitude>> partial{{{}, Amplitude{1.0, 0.0}}};
        for (const auto& q : sites_) {
            std::vector<std::pair<std::vector<std::uint8_t>, Amplitude>> next;
            next.reserve(partial.size() * 2);
            for (auto& [bits, a] : partial)
                for (std::uint8_t t = 0; t < 2; ++t) {
                    if (std::abs(q[t]) < kPruneEpsilon) continue;
                    auto nb = bits;
                    nb.push_back(t);
                    next.emplace_back(std::move(nb), a * q[t]);
                }
            partial = std::move(next);
        }
        StateSuperposition out;
        for (std::uint8_t g = 0; g < 2; ++g) {
            if (std::abs(sign_[g]) < kPruneEpsilon) continue;
            for (const auto& [bits, a] : partial)
                out.add(BasisState(g == 0 ? Sign::plus : Sign::minus, lower_, upper(), bits), a * sign_[g]);
        }
        return out;
    }

private:
    Qubit sign_;
    std::int64_t lower_;
    std::vector<Qubit> sites_;
};

/// U|gamma, s> in factored form.
inline ProductState apply_gauge_product(const GaugeTransform& u, const BasisState& x) {
    return ProductState::from_basis(x).transformed(u);
}

/// U|gamma, s> as a superposition. Outcome keys keep the interval of x and are
/// not re-canonicalized.
inline StateSuperposition apply_gauge(const GaugeTransform& u, const BasisState& x,
                                      std::size_t cap = kDefaultSupportCap) {
    return apply_gauge_product(u, x).expand(cap);
}

inline StateSuperposition apply_gauge(const GaugeTransform& u, const StateSuperposition& psi,
                                      std::size_t cap = kDefaultSupportCap) {
    StateSuperposition out;
    for (const auto& [x, a] : psi) {
        auto part = apply_gauge(u, x, cap);
        for (const auto& [y, b] : part) out.add(y, a * b);
        if (out.size() > cap) throw ResourceError("gauge expansion exceeds the support cap", cap);
    }
    return out;
}

/// (U x U) acting on a two-register superposition.
inline Superposition<RegisterPair> apply_gauge(const GaugeTransform& u, const Superposition<RegisterPair>& psi,
                                               std::size_t cap = kDefaultSupportCap) {
    Superposition<RegisterPair> out;
    for (const auto& [k, a] : psi) {
        auto left = apply_gauge(u, k.first, cap);
        auto right = apply_gauge(u, k.second, cap);
        if (left.size() * right.size() > cap)
            throw ResourceError("two-register gauge expansion exceeds the support cap", cap);
        for (const auto& [x, b] : left)
            for (const auto& [y, c] : right) out.add({x, y}, a * b * c);
    }
    return out;
}

/// <x| U x> = (U_0)_{gamma,gamma} prod_j (U_j)_{s(j),s(j)}.
inline Amplitude overlap_after_gauge(const GaugeTransform& u, const BasisState& x) {
    int g = x.sign() == Sign::plus ? 0 : 1;
    Amplitude a = u.sign_matrix()(g, g);
    for (auto j = x.lower(); j <= x.upper(); ++j) {
        int s = x.bit(j);
        a *= u.at(j)(s, s);
    }
    return a;
}

// --- conjugated arithmetic ------------------------------------------------------

/// Probability that rel_{A,U} holds between two states of the U frame:
/// rel_A evaluated on U^dagger psi and U^dagger phi.
inline double prob_rel_gauged(const GaugeTransform& u, const StateSuperposition& psi, const StateSuperposition& phi,
                              Relation rel, std::size_t cap = kDefaultSupportCap) {
    auto back = inverse(u);
    return prob_rel(apply_gauge(back, psi, cap), apply_gauge(back, phi, cap), rel);
}

/// (U x U) op~_A (U^dagger x U^dagger) on two-register superpositions.
inline Superposition<RegisterPair> conjugated_op(const GaugeTransform& u, Operation op,
                                                 const Superposition<RegisterPair>& psi,
                                                 std::size_t cap = kDefaultSupportCap) {
    auto pulled = apply_gauge(inverse(u), psi, cap);
    auto combined = lift([op](const RegisterPair& p) { return register_op(op, p); }, pulled);
    return apply_gauge(u, combined, cap);
}

/// U |.|_A U^dagger.
inline StateSuperposition conjugated_abs(const GaugeTransform& u, const StateSuperposition& psi,
                                         std::size_t cap = kDefaultSupportCap) {
    auto pulled = apply_gauge(inverse(u), psi, cap);
    auto folded = lift([](const BasisState& x) { return abs_A(canonicalize(x)).state(); }, pulled);
    return apply_gauge(u, folded, cap);
}

/// Arithmetic of the U frame evaluated on product states.
///
/// Each operation undoes U numerically, requires the result to be a basis
/// state within `tol`, applies the plain relation or operation and re-gauges.
/// Anything that fails to collapse raises ConsistencyError.
class GaugedArithmetic {
public:
    explicit GaugedArithmetic(GaugeTransform u, double tol = 1e-9)
        : u_(std::move(u)), back_(inverse(u_)), tol_(tol) {}

    const GaugeTransform& gauge() const noexcept { return u_; }

    ProductState embed(const StringRational& x) const { return apply_gauge_product(u_, x.state()); }

    StringRational pull_back(const ProductState& p) const {
        auto c = p.transformed(back_).collapse(tol_);
        if (!c) throw ConsistencyError("U-frame state does not pull back to a basis state");
        if (std::abs(std::abs(c->second) - 1.0) > tol_)
            throw ConsistencyError("U-frame state pulls back with non-unit amplitude");
        return canonicalize(c->first);
    }

    bool holds(Relation rel, const ProductState& a, const ProductState& b) const {
        return qframe::holds(rel, pull_back(a), pull_back(b));
    }

    ProductState apply(Operation op, const ProductState& a, const ProductState& b) const {
        return embed(qframe::apply(op, pull_back(a), pull_back(b)));
    }

    ProductState abs(const ProductState& a) const { return embed(abs_A(pull_back(a))); }

private:
    GaugeTransform u_;
    GaugeTransform back_;
    double tol_;
};

// --- JSON ------------------------------------------------------------------------

namespace detail {

inline nlohmann::json matrix_json(const Mat2& u) {
    auto entry = [](Amplitude a) { return nlohmann::json::array({a.real(), a.imag()}); };
    return nlohmann::json::array({nlohmann::json::array({entry(u(0, 0)), entry(u(0, 1))}),
                                  nlohmann::json::array({entry(u(1, 0)), entry(u(1, 1))})});
}

inline Mat2 matrix_from_json(const nlohmann::json& j) {
    if (j.is_string()) {
        auto name = j.get<std::string>();
        if (name == "identity") return Mat2::identity();
        if (name == "hadamard") return Mat2::hadamard();
        if (name == "hadamard_su2") return Mat2::hadamard_su2();
        throw DomainError("unknown named matrix '" + name + "'");
    }
    Mat2 u;
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) {
            const auto& e = j.at(static_cast<std::size_t>(r)).at(static_cast<std::size_t>(c));
            u(r, c) = Amplitude{e.at(0).get<double>(), e.at(1).get<double>()};
        }
    return u;
}

}  // namespace detail

inline nlohmann::json gauge_to_json(const GaugeTransform& g) {
    nlohmann::json j;
    j["global"] = g.is_global();
    j["group"] = g.group() == Group::su2 ? "su2" : "u2";
    j["default"] = distance(g.default_matrix(), Mat2::identity()) == 0.0 ? nlohmann::json("identity")
                                                                        : detail::matrix_json(g.default_matrix());
    auto sites = nlohmann::json::array();
    for (const auto& [site, u] : g.sites()) sites.push_back({{"site", site}, {"matrix", detail::matrix_json(u)}});
    j["sites"] = sites;
    if (g.sign_override()) j["sign"] = detail::matrix_json(*g.sign_override());
    return j;
}

/// Reads {"global": bool, "sites": [{"site": j, "matrix": M}], "default": M|"identity",
/// "sign": M (optional), "group": "su2"|"u2" (optional)}. Matrices are
/// [[[re,im],[re,im]],[[re,im],[re,im]]] (row major) or a name.
inline GaugeTransform gauge_from_json(const nlohmann::json& j) {
    Group group = j.value("group", std::string("su2")) == "u2" ? Group::u2 : Group::su2;
    Mat2 def = j.contains("default") ? detail::matrix_from_json(j.at("default")) : Mat2::identity();
    bool global = j.value("global", false);
    GaugeTransform g;
    if (global) {
        if (j.contains("sites") && !j.at("sites").empty())
            throw DomainError("a global gauge cannot list per-site matrices");
        if (j.contains("matrix")) def = detail::matrix_from_json(j.at("matrix"));
        g = GaugeTransform::global(def, group);
    } else {
        std::map<std::int64_t, Mat2> sites;
        if (j.contains("sites"))
            for (const auto& s : j.at("sites")) sites[s.at("site").get<std::int64_t>()] = detail::matrix_from_json(s.at("matrix"));
        g = GaugeTransform::local(std::move(sites), def, group);
    }
    if (j.contains("sign")) g = g.with_sign(detail::matrix_from_json(j.at("sign")));
    return g;
}

}  // namespace qframe
