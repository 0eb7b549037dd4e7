#include "cgw/operator.hpp"

#include <Eigen/SparseCholesky>
#include <cmath>
#include <ostream>
#include <random>

#include "cgw/error.hpp"

namespace cgw {

namespace {

using Trip = Eigen::Triplet<double>;

// P1 stiffness on n nodes of a uniform grid with one Dirichlet end.
// natural_last: the free (Neumann) end is the last node, else the first.
void stiffness(std::vector<Trip>& t, int off_r, int off_c, int n, double h, bool natural_last,
               double scale) {
    for (int i = 0; i < n; ++i) {
        const bool free_end = natural_last ? (i == n - 1) : (i == 0);
        t.emplace_back(off_r + i, off_c + i, scale * (free_end ? 1.0 : 2.0) / h);
        if (i > 0) t.emplace_back(off_r + i, off_c + i - 1, -scale / h);
        if (i < n - 1) t.emplace_back(off_r + i, off_c + i + 1, -scale / h);
    }
}

SpMat from_triplets(int rows, int cols, const std::vector<Trip>& t) {
    SpMat m(rows, cols);
    m.setFromTriplets(t.begin(), t.end());
    m.makeCompressed();
    return m;
}

// Weight of memory block k in φ and in the energy.
struct MemoryCoupling {
    std::vector<double> phi_weight;     // φ = w + Σ phi_weight[k] m_k
    std::vector<double> energy_weight;  // W block = energy_weight[k] K_w
};

MemoryCoupling memory_coupling(const Generator& gen) {
    MemoryCoupling c;
    if (gen.history) {
        c.phi_weight = gen.history->weights;
        c.energy_weight = gen.history->weights;
    } else {
        for (const auto& m : gen.kernel.modes()) {
            c.phi_weight.push_back(1.0);
            c.energy_weight.push_back(m.b / m.a);
        }
    }
    return c;
}

// Heat-side rows: -K_w (θ_w + Σ c_k m_k) / mass, plus memory transport rows.
void heat_and_memory_rows(std::vector<Trip>& t, const Generator& gen, int row_w0, int col_w0,
                          int mem_off, const std::vector<double>& mass) {
    const Layout& L = gen.layout;
    const double hw = L.h_w();
    const int nw = L.n_w;
    const MemoryCoupling mc = memory_coupling(gen);
    auto add_kw = [&](int col0, double scale) {
        for (int j = 0; j < nw; ++j) {
            const double inv_m = 1.0 / mass[j];
            t.emplace_back(row_w0 + j, col0 + j, -scale * inv_m * (j == 0 ? 1.0 : 2.0) / hw);
            if (j > 0) t.emplace_back(row_w0 + j, col0 + j - 1, scale * inv_m / hw);
            if (j < nw - 1) t.emplace_back(row_w0 + j, col0 + j + 1, scale * inv_m / hw);
        }
    };
    add_kw(col_w0, 1.0);
    for (int k = 0; k < L.n_mem; ++k) add_kw(mem_off + k * nw, mc.phi_weight[k]);

    if (gen.history) {
        const HistoryGrid& hg = *gen.history;
        for (int k = 0; k < hg.J(); ++k) {
            const double inv_d = 1.0 / hg.delta(k);
            for (int j = 0; j < nw; ++j) {
                const int r = mem_off + k * nw + j;
                t.emplace_back(r, r, -inv_d);
                if (k > 0) t.emplace_back(r, r - nw, inv_d);
                t.emplace_back(r, col_w0 + j, 1.0);
            }
        }
    } else {
        const auto& modes = gen.kernel.modes();
        for (int k = 0; k < L.n_mem; ++k) {
            for (int j = 0; j < nw; ++j) {
                const int r = mem_off + k * nw + j;
                t.emplace_back(r, r, -modes[k].b);
                t.emplace_back(r, col_w0 + j, modes[k].a / modes[k].b);
            }
        }
    }
}

void memory_gram(std::vector<Trip>& t, const Generator& gen, int mem_off) {
    const Layout& L = gen.layout;
    const MemoryCoupling mc = memory_coupling(gen);
    for (int k = 0; k < L.n_mem; ++k)
        stiffness(t, mem_off + k * L.n_w, mem_off + k * L.n_w, L.n_w, L.h_w(), false,
                  mc.energy_weight[k]);
}

void require_spd(const SpMat& W, const char* what) {
    Eigen::SimplicialLLT<SpMat> llt(W);
    if (llt.info() != Eigen::Success)
        throw NumericalError(std::string(what) + ": Gram matrix is not positive definite");
}

}  // namespace

HistoryGrid make_history_grid(const MemoryKernel& k, const HistoryParams& p) {
    const double delta = k.delta();
    const double s1 = p.s1.value_or(0.01 / delta);
    if (!(s1 > 0.0)) throw ConfigError("history.s1 must be positive");
    if (!(p.tail_tol > 0.0 && p.tail_tol < 1.0)) throw ConfigError("history.tail_tol must lie in (0,1)");

    HistoryGrid hg;
    hg.s.push_back(0.0);
    if (p.J) {
        const int J = *p.J;
        if (J < 2) throw ConfigError("history.J must be at least 2");
        double lo = s1, hi = s1;
        while (k.tail_mass(hi) > p.tail_tol) hi *= 2.0;
        if (hi == s1) throw ConfigError("history.s1 already beyond the tail tolerance");
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            (k.tail_mass(mid) > p.tail_tol ? lo : hi) = mid;
        }
        hg.ratio = std::pow(hi / s1, 1.0 / (J - 1));
        for (int j = 0; j < J; ++j) hg.s.push_back(s1 * std::pow(hg.ratio, j));
        hg.s.back() = hi;
    } else {
        if (!(p.ratio > 1.0)) throw ConfigError("history.ratio must exceed 1");
        hg.ratio = p.ratio;
        double s = s1;
        hg.s.push_back(s);
        while (k.tail_mass(s) > p.tail_tol) {
            s *= p.ratio;
            hg.s.push_back(s);
            if (hg.s.size() > 100000) throw ConfigError("history grid too large");
        }
    }
    for (std::size_t j = 0; j + 1 < hg.s.size(); ++j)
        hg.weights.push_back(k.mu_integral(hg.s[j], hg.s[j + 1]));
    return hg;
}

Generator assemble(const MemoryKernel& k, const GridSpec& grid) {
    if (grid.n_u < 8 || grid.n_w < 8) throw ConfigError("grid: n_u and n_w must be at least 8");
    if (!k.check().valid) throw ConfigError("kernel: g does not have unit mass (use normalize)");

    Generator gen(k, grid);
    Layout& L = gen.layout;
    L.n_u = grid.n_u;
    L.n_w = grid.n_w;
    if (const auto* hp = std::get_if<HistoryParams>(&grid.memory)) {
        gen.history = make_history_grid(k, *hp);
        L.n_mem = gen.history->J();
    } else {
        L.n_mem = static_cast<int>(k.modes().size());
    }

    const double hu = L.h_u(), hw = L.h_w();
    const int nu = L.n_u, nw = L.n_w, n = L.dim();
    const int th = L.off_theta();

    std::vector<double> mass(L.n_theta(), hu);
    mass[nu - 1] = 0.5 * (hu + hw);
    for (int j = 1; j < nw; ++j) mass[nu - 1 + j] = hw;

    std::vector<Trip> a;
    a.reserve(8 * n);
    // u̇ = v on wave nodes (the interface node carries v(0) = w(0))
    for (int i = 0; i < nu; ++i) a.emplace_back(i, th + i, 1.0);
    // v̇ = u_xx, lumped: -K_u u / m
    for (int i = 0; i < nu; ++i) {
        const double inv_m = 1.0 / mass[i];
        a.emplace_back(th + i, i, -inv_m * (i == nu - 1 ? 1.0 : 2.0) / hu);
        if (i > 0) a.emplace_back(th + i, i - 1, inv_m / hu);
        if (i < nu - 1) a.emplace_back(th + i, i + 1, inv_m / hu);
    }
    std::vector<double> heat_mass(mass.begin() + (nu - 1), mass.end());
    heat_and_memory_rows(a, gen, L.heat(0), L.heat(0), L.off_mem(), heat_mass);
    gen.A = from_triplets(n, n, a);

    std::vector<Trip> w;
    stiffness(w, 0, 0, nu, hu, true, 1.0);
    for (int i = 0; i < L.n_theta(); ++i) w.emplace_back(th + i, th + i, mass[i]);
    memory_gram(w, gen, L.off_mem());
    gen.W = from_triplets(n, n, w);

    if (gen.history) {
        auto hs = std::make_shared<HistoryStructure>();
        hs->n_u = nu;
        hs->n_w = nw;
        hs->h_u = hu;
        hs->h_w = hw;
        hs->theta_mass = mass;
        hs->weights = gen.history->weights;
        for (int c = 0; c < gen.history->J(); ++c) hs->deltas.push_back(gen.history->delta(c));
        gen.structure = hs;
    }

    require_spd(gen.W, "assemble");
    const double defect = dissipativity_defect(gen, 4, 12345u);
    if (defect > 1e-10)
        throw PropertyViolation("assemble: discrete dissipativity violated, max Re<Az,z>_W/|z|^2 = " +
                                std::to_string(defect));
    return gen;
}

Operator decoupled_wave_block(const Generator& gen) {
    const Layout& L = gen.layout;
    const int nu = L.n_u, nv = nu - 1;
    const double hu = L.h_u();
    std::vector<Trip> a, w;
    for (int i = 0; i < nv; ++i) a.emplace_back(i, nu + i, 1.0);
    for (int i = 0; i < nv; ++i) {
        a.emplace_back(nu + i, i, -2.0 / (hu * hu));
        if (i > 0) a.emplace_back(nu + i, i - 1, 1.0 / (hu * hu));
        a.emplace_back(nu + i, i + 1, 1.0 / (hu * hu));
    }
    stiffness(w, 0, 0, nu, hu, true, 1.0);
    for (int i = 0; i < nv; ++i) w.emplace_back(nu + i, nu + i, hu);
    Operator op;
    op.A = from_triplets(nu + nv, nu + nv, a);
    op.W = from_triplets(nu + nv, nu + nv, w);
    return op;
}

Operator a2_block(const Generator& gen) {
    if (!gen.history) throw ConfigError("a2_block: requires history-grid memory");
    const Layout& L = gen.layout;
    const int nw = L.n_w, n = nw + L.n_mem * nw;
    const double hw = L.h_w();
    std::vector<double> mass(nw, hw);
    mass[0] = 0.5 * hw;
    std::vector<Trip> a, w;
    heat_and_memory_rows(a, gen, 0, 0, nw, mass);
    for (int j = 0; j < nw; ++j) w.emplace_back(j, j, mass[j]);
    memory_gram(w, gen, nw);
    Operator op;
    op.A = from_triplets(n, n, a);
    op.W = from_triplets(n, n, w);
    auto hs = std::make_shared<HistoryStructure>(*gen.structure);
    hs->n_u = 0;
    hs->h_u = 0.0;
    hs->theta_mass = mass;
    op.structure = hs;
    return op;
}

// ---- interface constraints --------------------------------------------------

namespace {

int raw_dim(const Layout& L) { return 2 * L.n_u + L.n_w + L.n_mem * L.n_w; }

Vec raw_pack(const Layout& L, const RawState& r) {
    if (r.u.size() != L.n_u || r.v.size() != L.n_u || r.w.size() != L.n_w ||
        r.mem.size() != L.n_mem * L.n_w)
        throw ConfigError("domain_project: state shape does not match the grid");
    Vec x(raw_dim(L));
    x << r.u, r.v, r.w, r.mem;
    return x;
}

SpMat raw_gram(const Generator& gen) {
    const Layout& L = gen.layout;
    const int nu = L.n_u, nw = L.n_w;
    std::vector<Trip> t;
    stiffness(t, 0, 0, nu, L.h_u(), true, 1.0);
    for (int i = 0; i < nu; ++i) t.emplace_back(nu + i, nu + i, i == nu - 1 ? 0.5 * L.h_u() : L.h_u());
    for (int j = 0; j < nw; ++j) t.emplace_back(2 * nu + j, 2 * nu + j, j == 0 ? 0.5 * L.h_w() : L.h_w());
    memory_gram(t, gen, 2 * nu + nw);
    return from_triplets(raw_dim(L), raw_dim(L), t);
}

// Rows: v(0) − w(0), and u'(0) − φ'(0) with 3-point one-sided differences.
Eigen::MatrixXd raw_constraints(const Generator& gen) {
    const Layout& L = gen.layout;
    const int nu = L.n_u, nw = L.n_w;
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(2, raw_dim(L));
    C(0, 2 * nu - 1) = 1.0;
    C(0, 2 * nu) = -1.0;
    const double hu = L.h_u(), hw = L.h_w();
    C(1, nu - 1) += 3.0 / (2 * hu);
    C(1, nu - 2) += -4.0 / (2 * hu);
    C(1, nu - 3) += 1.0 / (2 * hu);
    const double dphi[3] = {-3.0 / (2 * hw), 4.0 / (2 * hw), -1.0 / (2 * hw)};
    const MemoryCoupling mc = memory_coupling(gen);
    for (int j = 0; j < 3; ++j) {
        C(1, 2 * nu + j) -= dphi[j];
        for (int k = 0; k < L.n_mem; ++k) C(1, 2 * nu + nw + k * nw + j) -= mc.phi_weight[k] * dphi[j];
    }
    return C;
}

}  // namespace

RawState to_raw(const Generator& gen, const Vec& z) {
    const Layout& L = gen.layout;
    if (z.size() != L.dim()) throw ConfigError("to_raw: wrong state dimension");
    RawState r;
    r.u = z.head(L.n_u);
    r.v = z.segment(L.off_theta(), L.n_u);
    r.w = z.segment(L.heat(0), L.n_w);
    r.mem = z.tail(L.n_mem * L.n_w);
    return r;
}

Eigen::Vector2d interface_residuals(const Generator& gen, const RawState& raw) {
    return raw_constraints(gen) * raw_pack(gen.layout, raw);
}

Vec domain_project(const Generator& gen, const RawState& raw) {
    const Layout& L = gen.layout;
    const Vec x = raw_pack(L, raw);
    const Eigen::MatrixXd C = raw_constraints(gen);
    Eigen::SimplicialLDLT<SpMat> ldlt(raw_gram(gen));
    if (ldlt.info() != Eigen::Success) throw NumericalError("domain_project: Gram factorization failed");
    const Eigen::MatrixXd WiCt = ldlt.solve(Eigen::MatrixXd(C.transpose()));
    const Eigen::Matrix2d S = C * WiCt;
    const Vec y = x - WiCt * S.fullPivLu().solve(C * x);

    Vec z(L.dim());
    z.head(L.n_u) = y.head(L.n_u);
    z.segment(L.off_theta(), L.n_u) = y.segment(L.n_u, L.n_u);
    z.segment(L.heat(0), L.n_w) = y.segment(2 * L.n_u, L.n_w);
    z.tail(L.n_mem * L.n_w) = y.tail(L.n_mem * L.n_w);
    return z;
}

Eigen::MatrixXd to_dense(const SpMat& m) { return Eigen::MatrixXd(m); }

void export_triplets(const SpMat& m, std::ostream& os, const char* name) {
    os << "# " << name << " " << m.rows() << " x " << m.cols() << ", nnz " << m.nonZeros() << "\n";
    os << "# columns: row col re im (0-based)\n";
    os.precision(17);
    for (int c = 0; c < m.outerSize(); ++c)
        for (SpMat::InnerIterator it(m, c); it; ++it)
            os << it.row() << " " << it.col() << " " << it.value() << " 0\n";
}

double w_inner(const Operator& op, const Vec& x, const Vec& y) { return x.dot(op.W * y); }

double w_norm(const Operator& op, const Vec& x) { return std::sqrt(std::max(0.0, x.dot(op.W * x))); }

double w_norm(const Operator& op, const CVec& x) {
    const Vec re = x.real(), im = x.imag();
    return std::sqrt(std::max(0.0, re.dot(op.W * re) + im.dot(op.W * im)));
}

double dissipativity_defect(const Operator& op, int n_samples, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    double worst = -std::numeric_limits<double>::infinity();
    for (int s = 0; s < n_samples; ++s) {
        Vec z(op.dim());
        for (int i = 0; i < z.size(); ++i) z[i] = nd(rng);
        const Vec Az = op.A * z;
        worst = std::max(worst, z.dot(op.W * Az) / z.dot(op.W * z));
    }
    return worst;
}

}  // namespace cgw
