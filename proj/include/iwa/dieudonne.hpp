#pragma once

#include <functional>
#include <string>
#include <vector>

#include "padic.hpp"

namespace iwa {

// Dense matrix over E, row-major.
class EMatrix {
public:
    EMatrix() = default;
    EMatrix(int rows, int cols, const Form& f)
        : r_(rows), c_(cols), f_(f), a_(static_cast<size_t>(rows) * cols, zero_of(f)) {}

    static EMatrix identity(int n, const Form& f) {
        EMatrix m(n, n, f);
        for (int i = 0; i < n; ++i) m(i, i) = one_of(f);
        return m;
    }
    static EMatrix from_rows(const std::vector<std::vector<QuadExtScalar>>& rows, const Form& f) {
        EMatrix m(static_cast<int>(rows.size()), rows.empty() ? 0 : static_cast<int>(rows[0].size()), f);
        for (int i = 0; i < m.r_; ++i) {
            if (static_cast<int>(rows[i].size()) != m.c_) throw InvalidArgument("ragged matrix rows");
            for (int j = 0; j < m.c_; ++j) m(i, j) = rows[i][j];
        }
        return m;
    }
    static EMatrix column(const std::vector<QuadExtScalar>& v, const Form& f) {
        EMatrix m(static_cast<int>(v.size()), 1, f);
        for (size_t i = 0; i < v.size(); ++i) m(static_cast<int>(i), 0) = v[i];
        return m;
    }

    int rows() const { return r_; }
    int cols() const { return c_; }
    const Form& form() const { return f_; }
    QuadExtScalar& operator()(int i, int j) { return a_[static_cast<size_t>(i) * c_ + j]; }
    const QuadExtScalar& operator()(int i, int j) const { return a_[static_cast<size_t>(i) * c_ + j]; }
    std::vector<QuadExtScalar> col(int j) const {
        std::vector<QuadExtScalar> v;
        for (int i = 0; i < r_; ++i) v.push_back((*this)(i, j));
        return v;
    }

    friend EMatrix operator*(const EMatrix& x, const EMatrix& y) {
        if (x.c_ != y.r_) throw InvalidArgument("matrix shapes do not match");
        EMatrix m(x.r_, y.c_, x.f_ ? x.f_ : y.f_);
        for (int i = 0; i < x.r_; ++i)
            for (int j = 0; j < y.c_; ++j) {
                QuadExtScalar s = zero_of(m.f_);
                for (int k = 0; k < x.c_; ++k)
                    if (!x(i, k).is_exact_zero() && !y(k, j).is_exact_zero()) s += x(i, k) * y(k, j);
                m(i, j) = s;
            }
        return m;
    }
    friend EMatrix operator+(const EMatrix& x, const EMatrix& y) {
        if (x.r_ != y.r_ || x.c_ != y.c_) throw InvalidArgument("matrix shapes do not match");
        EMatrix m = x;
        for (size_t i = 0; i < m.a_.size(); ++i) m.a_[i] += y.a_[i];
        return m;
    }
    friend EMatrix operator-(const EMatrix& x, const EMatrix& y) { return x + y.scaled(-one_of(y.f_)); }
    EMatrix scaled(const QuadExtScalar& c) const {
        EMatrix m = *this;
        for (auto& e : m.a_)
            if (!e.is_exact_zero()) e *= c;
        return m;
    }
    EMatrix transpose() const {
        EMatrix m(c_, r_, f_);
        for (int i = 0; i < r_; ++i)
            for (int j = 0; j < c_; ++j) m(j, i) = (*this)(i, j);
        return m;
    }
    bool is_zero() const {
        for (const auto& e : a_)
            if (!e.is_zero()) return false;
        return true;
    }
    friend bool operator==(const EMatrix& x, const EMatrix& y) {
        return x.r_ == y.r_ && x.c_ == y.c_ && (x - y).is_zero();
    }

    EMatrix minor_without(int row, int col) const {
        EMatrix m(r_ - 1, c_ - 1, f_);
        for (int i = 0, mi = 0; i < r_; ++i) {
            if (i == row) continue;
            for (int j = 0, mj = 0; j < c_; ++j) {
                if (j == col) continue;
                m(mi, mj++) = (*this)(i, j);
            }
            ++mi;
        }
        return m;
    }
    // Laplace expansion; the matrices here are at most 4x4.
    QuadExtScalar det() const {
        if (r_ != c_) throw InvalidArgument("determinant of a non-square matrix");
        if (r_ == 0) return one_of(f_);
        if (r_ == 1) return a_[0];
        QuadExtScalar s = zero_of(f_);
        for (int j = 0; j < c_; ++j) {
            if ((*this)(0, j).is_exact_zero()) continue;
            QuadExtScalar t = (*this)(0, j) * minor_without(0, j).det();
            s = j % 2 ? s - t : s + t;
        }
        return s;
    }
    EMatrix inverse() const {
        QuadExtScalar d = det();
        if (d.is_zero()) throw DivisionByZero("matrix is singular to precision");
        EMatrix m(r_, c_, f_);
        for (int i = 0; i < r_; ++i)
            for (int j = 0; j < c_; ++j) {
                QuadExtScalar c = minor_without(j, i).det();
                m(i, j) = ((i + j) % 2 ? -c : c) / d;
            }
        return m;
    }
    // det(x I - A) as coefficients of x^0..x^n, from sums of principal minors.
    std::vector<QuadExtScalar> charpoly() const {
        if (r_ != c_) throw InvalidArgument("characteristic polynomial of a non-square matrix");
        int n = r_;
        std::vector<QuadExtScalar> c(n + 1, zero_of(f_));
        c[n] = one_of(f_);
        for (unsigned mask = 1; mask < (1u << n); ++mask) {
            std::vector<int> idx;
            for (int i = 0; i < n; ++i)
                if (mask >> i & 1) idx.push_back(i);
            int s = static_cast<int>(idx.size());
            EMatrix sub(s, s, f_);
            for (int i = 0; i < s; ++i)
                for (int j = 0; j < s; ++j) sub(i, j) = (*this)(idx[i], idx[j]);
            QuadExtScalar d = sub.det();
            c[n - s] = s % 2 ? c[n - s] - d : c[n - s] + d;
        }
        return c;
    }
    // Rank by elimination with minimal-valuation pivots; entries zero to
    // precision count as zero.
    int rank() const {
        EMatrix m = *this;
        int rk = 0;
        for (int col = 0; col < c_ && rk < r_; ++col) {
            int piv = -1;
            HalfInt best{0};
            for (int i = rk; i < r_; ++i) {
                if (m(i, col).is_zero()) continue;
                HalfInt v = m(i, col).valuation();
                if (piv < 0 || v < best) piv = i, best = v;
            }
            if (piv < 0) continue;
            for (int j = 0; j < c_; ++j) std::swap(m(rk, j), m(piv, j));
            for (int i = rk + 1; i < r_; ++i) {
                if (m(i, col).is_zero()) continue;
                QuadExtScalar t = m(i, col) / m(rk, col);
                for (int j = col; j < c_; ++j) m(i, j) -= t * m(rk, j);
            }
            ++rk;
        }
        return rk;
    }

    static QuadExtScalar zero_of(const Form& f) { return QuadExtScalar(PadicScalar::exact_zero(f ? f->p : 3), f); }
    static QuadExtScalar one_of(const Form& f) {
        return QuadExtScalar(PadicScalar::from_long(f ? f->p : 3, 1, f ? f->prec : kFormPrec), f);
    }

private:
    int r_ = 0, c_ = 0;
    Form f_;
    std::vector<QuadExtScalar> a_;
};

using EVector = std::vector<QuadExtScalar>;

// Fil^from for from <= i < next step's from; below the first step the
// filtration is everything, and a step with no vectors is zero.
struct FilStep {
    int from;
    std::vector<EVector> span;
};

struct PhiModule {
    int dim = 0;
    std::vector<std::string> labels;
    EMatrix phi;  // column j is phi(e_j)
    std::vector<FilStep> filtration;
    std::string origin;  // "sym2" for symmetric squares, else empty
    Form form;

    std::vector<EVector> fil(int i) const {
        std::vector<EVector> all;
        const FilStep* cur = nullptr;
        for (const auto& s : filtration)
            if (s.from <= i) cur = &s;
        if (cur) return cur->span;
        for (int j = 0; j < dim; ++j) all.push_back(unit_vector(j));
        return all;
    }
    int fil_dim(int i) const { return span_dim(fil(i)); }
    // (i, dim Fil^i) at each jump, starting from the last i with the full space.
    std::vector<std::pair<int, int>> filtration_dims() const {
        std::vector<std::pair<int, int>> out;
        if (filtration.empty()) return {{0, dim}};
        out.push_back({filtration.front().from - 1, dim});
        for (const auto& s : filtration) out.push_back({s.from, span_dim(s.span)});
        return out;
    }
    EVector apply_phi(const EVector& v) const { return (phi * EMatrix::column(v, form)).col(0); }
    EVector unit_vector(int j) const {
        EVector v(dim, EMatrix::zero_of(form));
        v[j] = EMatrix::one_of(form);
        return v;
    }
    int span_dim(const std::vector<EVector>& vs) const {
        if (vs.empty()) return 0;
        EMatrix m(static_cast<int>(vs.size()), dim, form);
        for (size_t i = 0; i < vs.size(); ++i)
            for (int j = 0; j < dim; ++j) m(static_cast<int>(i), j) = vs[i][j];
        return m.rank();
    }
};

inline QuadExtScalar e_int(const Form& f, long x) { return QuadExtScalar(PadicScalar::from_long(f->p, x, f->prec), f); }
inline QuadExtScalar e_pow_p(const Form& f, long e) {
    return QuadExtScalar(PadicScalar::from_int_rel(f->p, pow_ui(f->p, e), f->prec), f);
}
inline QuadExtScalar e_eps(const Form& f) { return QuadExtScalar(f->eps_val, f); }

// D with basis (omega, omega2 = p^{-k-1} phi(omega)); Fil^1 = <omega>, Fil^{k+2} = 0.
inline PhiModule dcris_of_form(int p, int k, RootOfUnity eps, const Precision& prec) {
    prec.validate();
    if (prec.p != p) throw InvalidArgument("precision prime differs from p");
    Form f = make_form(p, k, eps, std::max(kFormPrec, prec.M + 4 * k + 8));
    PhiModule D;
    D.dim = 2;
    D.form = f;
    D.labels = {"omega", "p^{-k-1}phi(omega)"};
    D.phi = EMatrix(2, 2, f);
    D.phi(1, 0) = e_pow_p(f, k + 1);
    D.phi(0, 1) = -e_eps(f);
    D.filtration = {{1, {D.unit_vector(0)}}, {k + 2, {}}};
    return D;
}

// Multiplies phi by c, the unramified twist.
inline PhiModule twist_phi(const PhiModule& D, const QuadExtScalar& c) {
    PhiModule T = D;
    T.phi = D.phi.scaled(c);
    return T;
}

namespace detail {

// Fil^i of a quadratic construction from the pairwise products of Fil^a and
// Fil^{i-a}; the range of a is bounded by the last jump of D.
inline std::vector<FilStep> product_filtration(const PhiModule& D, int out_dim,
                                               const std::function<EVector(const EVector&, const EVector&)>& prod,
                                               const PhiModule& shape) {
    int lo = D.filtration.empty() ? 0 : D.filtration.front().from;
    int hi = D.filtration.empty() ? 0 : D.filtration.back().from;
    std::vector<FilStep> steps;
    int last_dim = out_dim;
    for (int i = 2 * lo - 1; i <= 2 * hi; ++i) {
        std::vector<EVector> span;
        for (int a = i - hi; a <= hi; ++a)
            for (const auto& x : D.fil(a))
                for (const auto& y : D.fil(i - a)) span.push_back(prod(x, y));
        int d = shape.span_dim(span);
        if (d != last_dim) {
            // keep a basis only
            std::vector<EVector> basis;
            for (const auto& v : span) {
                basis.push_back(v);
                if (shape.span_dim(basis) < static_cast<int>(basis.size())) basis.pop_back();
            }
            steps.push_back({i, basis});
            last_dim = d;
        }
    }
    return steps;
}

}  // namespace detail

// Sym^2 of a 2-dimensional module in the basis (e0e0, e0e1, e1e1) of the
// symmetric algebra.
inline PhiModule sym_square(const PhiModule& D) {
    if (D.dim != 2) throw InvalidArgument("sym_square needs a 2-dimensional module");
    const Form& f = D.form;
    PhiModule S;
    S.dim = 3;
    S.form = f;
    S.origin = "sym2";
    S.labels = {D.labels[0] + "." + D.labels[0], D.labels[0] + "." + D.labels[1], D.labels[1] + "." + D.labels[1]};
    auto prod = [&](const EVector& x, const EVector& y) {
        return EVector{x[0] * y[0], x[0] * y[1] + x[1] * y[0], x[1] * y[1]};
    };
    S.phi = EMatrix(3, 3, f);
    const int basis[3][2] = {{0, 0}, {0, 1}, {1, 1}};
    for (int c = 0; c < 3; ++c) {
        EVector img = prod(D.phi.col(basis[c][0]), D.phi.col(basis[c][1]));
        for (int r = 0; r < 3; ++r) S.phi(r, c) = img[r];
    }
    S.filtration = detail::product_filtration(D, 3, prod, S);
    return S;
}

// wedge^2 of a 2-dimensional module: phi acts by det.
inline PhiModule wedge_square(const PhiModule& D) {
    if (D.dim != 2) throw InvalidArgument("wedge_square needs a 2-dimensional module");
    PhiModule W;
    W.dim = 1;
    W.form = D.form;
    W.labels = {D.labels[0] + "^" + D.labels[1]};
    W.phi = EMatrix(1, 1, D.form);
    W.phi(0, 0) = D.phi.det();
    auto wedge = [&](const EVector& x, const EVector& y) { return EVector{x[0] * y[1] - x[1] * y[0]}; };
    W.filtration = detail::product_filtration(D, 1, wedge, W);
    return W;
}

// phi (x) phi on D (x) D in the basis e_a (x) e_b, index 2a + b.
inline EMatrix tensor_square_phi(const PhiModule& D) {
    int n = D.dim;
    EMatrix T(n * n, n * n, D.form);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c)
                for (int d = 0; d < n; ++d) T(c * n + d, a * n + b) = D.phi(c, a) * D.phi(d, b);
    return T;
}

struct SymSplit {
    PhiModule D1, D2;
    EMatrix emb1, emb2;  // columns: basis of D_i in Sym^2 coordinates
    bool respects_filtration = false;
};

// D1 = <omega (x) phi(omega) + phi(omega) (x) omega>, D2 = <omega (x) omega, phi(omega) (x) phi(omega)>.
inline SymSplit split_sym_square(const PhiModule& S) {
    if (S.origin != "sym2" || S.dim != 3) throw InvalidArgument("split_sym_square needs a symmetric square");
    const Form& f = S.form;
    SymSplit r;
    // e0 = omega, e1 = p^{-k-1} phi(omega): phi(omega) = p^{k+1} e1, so the D1
    // generator is p^{k+1} e0e1 and phi(omega)(x)phi(omega) = p^{2k+2} e1e1.
    int k = f->k;
    r.emb1 = EMatrix(3, 1, f);
    r.emb1(1, 0) = e_pow_p(f, k + 1);
    r.emb2 = EMatrix(3, 2, f);
    r.emb2(0, 0) = EMatrix::one_of(f);
    r.emb2(2, 1) = e_pow_p(f, 2 * k + 2);
    EMatrix B(3, 3, f);
    for (int i = 0; i < 3; ++i) {
        B(i, 0) = r.emb1(i, 0);
        B(i, 1) = r.emb2(i, 0);
        B(i, 2) = r.emb2(i, 1);
    }
    EMatrix Binv = B.inverse();
    EMatrix induced = Binv * S.phi * B;
    // stability: no cross terms between the blocks
    for (int i : {1, 2})
        if (!induced(i, 0).is_zero() || !induced(0, i).is_zero()) throw Error("Sym^2 split is not phi-stable");
    auto make = [&](int dim, std::vector<int> idx, std::vector<std::string> labels) {
        PhiModule M;
        M.dim = dim;
        M.form = f;
        M.labels = std::move(labels);
        M.phi = EMatrix(dim, dim, f);
        for (int a = 0; a < dim; ++a)
            for (int b = 0; b < dim; ++b) M.phi(a, b) = induced(idx[a], idx[b]);
        return M;
    };
    r.D1 = make(1, {0}, {"omega.phi(omega)"});
    r.D2 = make(2, {1, 2}, {"omega.omega", "phi(omega).phi(omega)"});
    // project each Fil^i S onto the blocks; the split respects the filtration
    // when the projections add up to Fil^i S
    r.respects_filtration = true;
    for (const auto& step : S.filtration) {
        std::vector<EVector> p1, p2;
        for (const auto& v : step.span) {
            EVector c = (Binv * EMatrix::column(v, f)).col(0);
            if (!c[0].is_zero()) p1.push_back({c[0]});
            if (!c[1].is_zero() || !c[2].is_zero()) p2.push_back({c[1], c[2]});
        }
        int d1 = r.D1.span_dim(p1), d2 = r.D2.span_dim(p2);
        if (d1 + d2 != S.span_dim(step.span)) r.respects_filtration = false;
        r.D1.filtration.push_back({step.from, p1});
        r.D2.filtration.push_back({step.from, p2});
    }
    return r;
}

// D* = D_cris(W_f^*) in the basis (omega', phi(omega')), phi^2 = alpha^{-2}.
inline PhiModule dcris_dual_of_form(int p, int k, RootOfUnity eps, const Precision& prec) {
    prec.validate();
    Form f = make_form(p, k, eps, std::max(kFormPrec, prec.M + 4 * k + 8));
    PhiModule D;
    D.dim = 2;
    D.form = f;
    D.labels = {"omega'", "phi(omega')"};
    D.phi = EMatrix(2, 2, f);
    D.phi(1, 0) = EMatrix::one_of(f);
    D.phi(0, 1) = EMatrix::one_of(f) / (QuadExtScalar::alpha(f) * QuadExtScalar::alpha(f));
    D.filtration = {{-k, {D.unit_vector(0)}}, {1, {}}};
    return D;
}

// v_lambda = phi(w) + w / lambda for lambda = alpha, -alpha, with w the first
// basis vector; needs phi^2 = alpha^{-2}.
inline std::pair<EVector, EVector> eigenvectors_dual(const PhiModule& Dstar) {
    if (Dstar.dim != 2) throw InvalidArgument("eigenvectors_dual needs a 2-dimensional module");
    const Form& f = Dstar.form;
    QuadExtScalar a = QuadExtScalar::alpha(f);
    QuadExtScalar inv_a2 = EMatrix::one_of(f) / (a * a);
    if (!(Dstar.phi * Dstar.phi == EMatrix::identity(2, f).scaled(inv_a2)))
        throw InvalidArgument("phi^2 is not alpha^{-2} on the dual module");
    EVector w = Dstar.unit_vector(0), pw = Dstar.apply_phi(w);
    auto v = [&](const QuadExtScalar& lam) {
        EVector r(2, EMatrix::zero_of(f));
        for (int i = 0; i < 2; ++i) r[i] = pw[i] + w[i] / lam;
        return r;
    };
    return {v(a), v(-a)};
}

struct ChangeOfBasis {
    EMatrix M, M_inv;
    bool inverse_verified = false;
    bool relation_holds = false;  // (phi'phi', w'w', sym, antisym) = M (v(x)v) / 4
};

// M acts on (L_{a,a}, L_{-a,-a}, L_{a,-a}, L_{-a,a}).
inline ChangeOfBasis change_of_basis(const Form& f) {
    QuadExtScalar a = QuadExtScalar::alpha(f), a2 = a * a, z = EMatrix::zero_of(f), o = EMatrix::one_of(f);
    QuadExtScalar two_a = e_int(f, 2) * a;
    ChangeOfBasis c;
    c.M = EMatrix::from_rows({{o, o, o, o}, {a2, a2, -a2, -a2}, {two_a, -two_a, z, z}, {z, z, -two_a, two_a}}, f);
    c.M_inv = c.M.inverse();
    c.inverse_verified = c.M * c.M_inv == EMatrix::identity(4, f) && c.M_inv * c.M == EMatrix::identity(4, f);
    // v_lambda (x) v_mu in the basis (w'w', w'phi', phi'w', phi'phi') of D* (x) D*
    auto vv = [&](const QuadExtScalar& l, const QuadExtScalar& m) {
        return std::vector<QuadExtScalar>{o / (l * m), o / l, o / m, o};
    };
    std::vector<std::vector<QuadExtScalar>> rows = {vv(a, a), vv(-a, -a), vv(a, -a), vv(-a, a)};
    EMatrix V = EMatrix::from_rows(rows, f);
    EMatrix lhs = (c.M * V).scaled(o / e_int(f, 4));
    EMatrix want = EMatrix::from_rows(
        {{z, z, z, o}, {o, z, z, z}, {z, o, o, z}, {z, -o, o, z}}, f);
    c.relation_holds = lhs == want;
    return c;
}

}  // namespace iwa
