#include "fstruct/collapse.hpp"

#include <cmath>
#include <stdexcept>

namespace fstruct {

namespace {

// Quintic smoothstep on [0, 1] and its derivatives.
double smooth5(double u) { return u * u * u * (10 + u * (-15 + 6 * u)); }
double dsmooth5(double u) { return 30.0 * u * u * (u - 1) * (u - 1); }
double ddsmooth5(double u) { return u * (120.0 * u * u - 180.0 * u + 60.0); }

double clamp01(double u) { return u < 0 ? 0 : (u > 1 ? 1 : u); }

}  // namespace

WarpProfile WarpProfile::quintic() {
    WarpProfile p;
    p.name = "quintic";
    p.margin = 0.0;
    p.s = [](double t) { return smooth5(clamp01((t - 2) / 2)); };
    p.ds = [](double t) {
        double u = (t - 2) / 2;
        return (u < 0 || u > 1) ? 0.0 : dsmooth5(u) / 2;
    };
    p.dds = [](double t) {
        double u = (t - 2) / 2;
        return (u < 0 || u > 1) ? 0.0 : ddsmooth5(u) / 4;
    };
    return p;
}

WarpProfile WarpProfile::quintic_margin(double m) {
    // Active interval [2+m, 4-m]; m = 1/20 keeps max s' = 1.875/1.9 below 1.
    WarpProfile p;
    p.name = "quintic_margin";
    p.margin = m;
    double len = 2 - 2 * m;
    p.s = [m, len](double t) { return smooth5(clamp01((t - 2 - m) / len)); };
    p.ds = [m, len](double t) {
        double u = (t - 2 - m) / len;
        return (u < 0 || u > 1) ? 0.0 : dsmooth5(u) / len;
    };
    p.dds = [m, len](double t) {
        double u = (t - 2 - m) / len;
        return (u < 0 || u > 1) ? 0.0 : ddsmooth5(u) / (len * len);
    };
    return p;
}

WarpProfile WarpProfile::linear_ramp() {
    WarpProfile p;
    p.name = "linear_ramp";
    p.s = [](double t) { return (t - 2) / 2; };
    p.ds = [](double) { return 0.5; };
    p.dds = [](double) { return 0.0; };
    return p;
}

WarpProfile WarpProfile::steep() {
    WarpProfile p;
    p.name = "steep";
    p.s = [](double t) { return 2 * (t - 2); };
    p.ds = [](double) { return 2.0; };
    p.dds = [](double) { return 0.0; };
    return p;
}

WarpProfile WarpProfile::by_name(const std::string& name) {
    if (name == "quintic") return quintic();
    if (name == "quintic_margin") return quintic_margin(1.0 / 20);
    if (name == "linear_ramp") return linear_ramp();
    if (name == "steep") return steep();
    throw std::invalid_argument("unknown profile '" + name + "'");
}

ProfileReport validate_profile(const WarpProfile& p, int grid_size) {
    if (grid_size < 100) throw std::invalid_argument("validate_profile: grid_size >= 100 required");
    ProfileReport rep;
    rep.max_s = rep.min_s = p.s(2.0);
    rep.max_ds = p.ds(2.0);
    rep.min_dds = p.dds(2.0);
    double prev = p.s(2.0);
    const double tol = 1e-12;
    bool monotone = true;
    for (int i = 0; i <= grid_size; ++i) {
        double t = 2.0 + 2.0 * i / grid_size;
        double s = p.s(t), ds = p.ds(t), dds = p.dds(t);
        rep.max_s = std::max(rep.max_s, s);
        rep.min_s = std::min(rep.min_s, s);
        rep.max_ds = std::max(rep.max_ds, ds);
        rep.min_dds = std::min(rep.min_dds, dds);
        if (s < prev - tol) monotone = false;
        prev = s;
    }
    if (std::abs(p.s(2.0)) > tol) rep.violations.push_back("s(2) != 0");
    if (std::abs(p.s(4.0) - 1.0) > tol) rep.violations.push_back("s(4) != 1");
    if (rep.min_s < -tol || rep.max_s > 1 + tol) rep.violations.push_back("s leaves [0, 1]");
    if (!monotone) rep.violations.push_back("s is not non-decreasing");
    if (rep.max_ds > 1 + tol) rep.violations.push_back("s' exceeds 1");
    if (rep.min_dds < -2 - tol) rep.violations.push_back("s'' drops below -2");
    if (p.margin > 0) {
        for (int i = 0; i <= 16; ++i) {
            double tl = 2.0 + p.margin * i / 16, tr = 4.0 - p.margin * i / 16;
            if (std::abs(p.s(tl)) > tol || std::abs(p.s(tr) - 1) > tol) {
                rep.violations.push_back("profile is not flat on its margins");
                break;
            }
        }
    } else {
        // No margin: the profile must at least be C^2-flat at the endpoints so
        // that it vanishes near 2 and is 1 near 4 in the glued metric.
        if (std::abs(p.ds(2.0)) > 1e-9 || std::abs(p.dds(2.0)) > 1e-9 ||
            std::abs(p.ds(4.0)) > 1e-9 || std::abs(p.dds(4.0)) > 1e-9)
            rep.violations.push_back("profile has no flat margin and non-flat endpoints");
    }
    rep.pass = rep.violations.empty();
    return rep;
}

namespace {

double exponent_scale(const WarpedMetric& m) {
    return m.convention == WarpConvention::PaperLiteral ? 1.0 : 0.5;
}

}  // namespace

double warp_f(const WarpedMetric& m, double t) {
    return std::pow(m.delta, exponent_scale(m) * m.profile.s(t));
}

double warp_df(const WarpedMetric& m, double t) {
    double L = std::log(m.delta);
    return exponent_scale(m) * m.profile.ds(t) * L * warp_f(m, t);
}

double warp_ddf(const WarpedMetric& m, double t) {
    double L = std::log(m.delta);
    double a = exponent_scale(m);
    double ds = m.profile.ds(t), dds = m.profile.dds(t);
    return (a * dds * L + a * a * ds * ds * L * L) * warp_f(m, t);
}

BoundResult curvature_lower_bound(const WarpedMetric& m, int grid_size) {
    if (!(m.delta > 0 && m.delta < 1))
        throw std::invalid_argument("curvature_lower_bound: delta must lie in (0, 1)");
    BoundResult res;
    double L = std::log(m.delta);
    res.limit = -4.0 * L * L;
    bool first = true;
    for (int i = 0; i <= grid_size; ++i) {
        double t = 2.0 + 2.0 * i / grid_size;
        double f = warp_f(m, t);
        double v = -warp_ddf(m, t) / f - warp_df(m, t) * warp_df(m, t) / (f * f);
        if (first || v < res.min_value) {
            res.min_value = v;
            res.argmin_t = t;
            first = false;
        }
    }
    res.pass = res.min_value >= res.limit - 1e-9 * std::abs(res.limit);
    return res;
}

double sectional_curvature(const WarpedMetric& m, double t, double x_weight, double v_weight,
                           double K_h_plane) {
    double f = warp_f(m, t), df = warp_df(m, t), ddf = warp_ddf(m, t);
    return -ddf / f * x_weight + (K_h_plane - df * df) / (f * f) * v_weight;
}

// --- metric fields -----------------------------------------------------------

MetricField product_flat_field(int fiber_dim) {
    MetricField f;
    f.dim = fiber_dim + 1;
    int n = f.dim;
    f.eval = [n](const double*, double* g) {
        for (int i = 0; i < n * n; ++i) g[i] = 0;
        for (int i = 0; i < n; ++i) g[i * n + i] = 1;
    };
    return f;
}

MetricField exp_warp_field(int fiber_dim) {
    MetricField f;
    f.dim = fiber_dim + 1;
    int n = f.dim;
    f.eval = [n](const double* x, double* g) {
        for (int i = 0; i < n * n; ++i) g[i] = 0;
        g[0] = 1;
        double w = std::exp(2 * x[0]);
        for (int i = 1; i < n; ++i) g[i * n + i] = w;
    };
    return f;
}

MetricField warped_torus_field(const WarpProfile& profile, double delta, int fiber_dim) {
    MetricField f;
    f.dim = fiber_dim + 1;
    int n = f.dim;
    auto s = profile.s;
    f.eval = [n, s, delta](const double* x, double* g) {
        for (int i = 0; i < n * n; ++i) g[i] = 0;
        g[0] = 1;
        double w = std::pow(delta, s(x[0]));
        for (int i = 1; i < n; ++i) g[i * n + i] = w;
    };
    return f;
}

MetricField sphere_fiber_field(double radius) {
    MetricField f;
    f.dim = 3;  // (t, theta, phi)
    f.eval = [radius](const double* x, double* g) {
        for (int i = 0; i < 9; ++i) g[i] = 0;
        g[0] = 1;
        g[4] = radius * radius;
        double st = std::sin(x[1]);
        g[8] = radius * radius * st * st;
    };
    return f;
}

MetricField scaled_field(const MetricField& base, double c2) {
    MetricField f;
    f.dim = base.dim;
    auto eval = base.eval;
    int n = base.dim;
    f.eval = [eval, c2, n](const double* x, double* g) {
        eval(x, g);
        for (int i = 0; i < n * n; ++i) g[i] *= c2;
    };
    return f;
}

// --- finite-difference oracle --------------------------------------------------

namespace {

using Mat = std::vector<double>;  // row-major n x n

Mat eval_metric(const MetricField& field, const std::vector<double>& x) {
    Mat g(field.dim * field.dim);
    field.eval(x.data(), g.data());
    return g;
}

Mat invert(const Mat& a_in, int n) {
    Mat a = a_in;
    Mat inv(n * n, 0.0);
    for (int i = 0; i < n; ++i) inv[i * n + i] = 1;
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col])) piv = r;
        if (std::abs(a[piv * n + col]) < 1e-14)
            throw std::runtime_error("fd oracle: metric matrix is singular");
        for (int c = 0; c < n; ++c) {
            std::swap(a[col * n + c], a[piv * n + c]);
            std::swap(inv[col * n + c], inv[piv * n + c]);
        }
        double d = a[col * n + col];
        for (int c = 0; c < n; ++c) {
            a[col * n + c] /= d;
            inv[col * n + c] /= d;
        }
        for (int r = 0; r < n; ++r) {
            if (r == col) continue;
            double m = a[r * n + col];
            if (m == 0) continue;
            for (int c = 0; c < n; ++c) {
                a[r * n + c] -= m * a[col * n + c];
                inv[r * n + c] -= m * inv[col * n + c];
            }
        }
    }
    return inv;
}

// Gamma[l][j][k] at x, by central differences of the metric.
std::vector<double> christoffels(const MetricField& field, const std::vector<double>& x,
                                 double h) {
    const int n = field.dim;
    std::vector<Mat> dg(n);
    for (int k = 0; k < n; ++k) {
        auto xp = x, xm = x;
        xp[k] += h;
        xm[k] -= h;
        Mat gp = eval_metric(field, xp), gm = eval_metric(field, xm);
        dg[k].resize(n * n);
        for (int i = 0; i < n * n; ++i) dg[k][i] = (gp[i] - gm[i]) / (2 * h);
    }
    Mat g = eval_metric(field, x);
    Mat ginv = invert(g, n);
    std::vector<double> gamma(n * n * n, 0.0);
    for (int l = 0; l < n; ++l)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                double sum = 0;
                for (int m = 0; m < n; ++m)
                    sum += ginv[l * n + m] *
                           (dg[j][m * n + k] + dg[k][m * n + j] - dg[m][j * n + k]);
                gamma[(l * n + j) * n + k] = 0.5 * sum;
            }
    return gamma;
}

}  // namespace

double fd_sectional_oracle(const MetricField& field, const std::vector<double>& x,
                           const std::vector<double>& u, const std::vector<double>& v,
                           double step) {
    const int n = field.dim;
    if (static_cast<int>(x.size()) != n || static_cast<int>(u.size()) != n ||
        static_cast<int>(v.size()) != n)
        throw std::invalid_argument("fd_sectional_oracle: arity mismatch");
    Mat g = eval_metric(field, x);
    auto ip = [&](const std::vector<double>& a, const std::vector<double>& b) {
        double s = 0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) s += g[i * n + j] * a[i] * b[j];
        return s;
    };
    double guu = ip(u, u), gvv = ip(v, v), guv = ip(u, v);
    double gram = guu * gvv - guv * guv;
    if (gram < 1e-12) throw std::invalid_argument("fd_sectional_oracle: near-degenerate plane");

    // dGamma[i][l][j][k] = d_i Gamma^l_{jk}, central differences of Christoffels.
    std::vector<std::vector<double>> dgamma(n);
    for (int i = 0; i < n; ++i) {
        auto xp = x, xm = x;
        xp[i] += step;
        xm[i] -= step;
        auto gp = christoffels(field, xp, step);
        auto gm = christoffels(field, xm, step);
        dgamma[i].resize(gp.size());
        for (size_t q = 0; q < gp.size(); ++q) dgamma[i][q] = (gp[q] - gm[q]) / (2 * step);
    }
    auto gamma = christoffels(field, x, step);
    auto G = [&](int l, int j, int k) { return gamma[(l * n + j) * n + k]; };

    // R^l_{ijk} = d_i G^l_{jk} - d_j G^l_{ik} + G^l_{im} G^m_{jk} - G^l_{jm} G^m_{ik};
    // numerator g(R(u,v)v, u) with (R(u,v)v)^l = R^l_{ijk} u^i v^j v^k.
    std::vector<double> Ruvv(n, 0.0);
    for (int l = 0; l < n; ++l) {
        double acc = 0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k) {
                    double r = dgamma[i][(l * n + j) * n + k] - dgamma[j][(l * n + i) * n + k];
                    for (int m = 0; m < n; ++m)
                        r += G(l, i, m) * G(m, j, k) - G(l, j, m) * G(m, i, k);
                    acc += r * u[i] * v[j] * v[k];
                }
        Ruvv[l] = acc;
    }
    double num = 0;
    for (int l = 0; l < n; ++l)
        for (int m = 0; m < n; ++m) num += g[l * n + m] * Ruvv[l] * u[m];
    return num / gram;
}

std::vector<CollapsePiece> theorem_b_pieces() {
    return {
        {"fstructure_piece", 4, 2, 1.0},  // structure orbits plus the diagonal circle
        {"bundle_piece", 4, 2, 1.0},      // fiber directions of the bundle side
        {"neck_piece", 4, 2, 1.0},        // diagonal action on the gluing collar
    };
}

IdentityCheck check_derivative_identities(const WarpedMetric& m, int npoints, double fd_step) {
    IdentityCheck out;
    for (int i = 0; i < npoints; ++i) {
        double t = 2.6 + 0.8 * i / (npoints - 1);
        double f = warp_f(m, t);
        auto fat = [&](double tt) { return warp_f(m, tt); };
        double fd1 = (fat(t + fd_step) - fat(t - fd_step)) / (2 * fd_step);
        double fd2 = (fat(t + fd_step) - 2 * f + fat(t - fd_step)) / (fd_step * fd_step);
        double a1 = warp_df(m, t), a2 = warp_ddf(m, t);
        out.max_rel_err_df = std::max(out.max_rel_err_df, std::abs(fd1 - a1) / std::abs(a1));
        out.max_rel_err_ddf = std::max(out.max_rel_err_ddf, std::abs(fd2 - a2) / std::abs(a2));
    }
    return out;
}

ScheduleResult volume_schedule(const CollapsePiece& piece, const std::vector<double>& deltas) {
    ScheduleResult res;
    for (double d : deltas)
        if (!(d > 0 && d < 1))
            throw std::invalid_argument("volume_schedule: deltas must lie in (0, 1)");
    for (double d : deltas) {
        double L = std::abs(std::log(d));
        res.volumes.push_back(piece.base_volume * std::pow(L, piece.log_exponent) *
                              std::pow(d, piece.collapsed_dims / 2.0));
    }
    res.divergent = piece.collapsed_dims == 0;
    if (!res.volumes.empty()) {
        res.final_over_first = res.volumes.back() / res.volumes.front();
        size_t peak = 0;
        for (size_t i = 1; i < res.volumes.size(); ++i)
            if (res.volumes[i] > res.volumes[peak]) peak = i;
        res.eventually_decreasing = !res.divergent;
        for (size_t i = peak + 1; i + 1 < res.volumes.size(); ++i)
            if (res.volumes[i + 1] >= res.volumes[i]) res.eventually_decreasing = false;
    }
    return res;
}

}  // namespace fstruct
