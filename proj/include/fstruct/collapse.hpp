// Numerical certification of the collapsing construction: warp-profile
// validation, the warped-product curvature lower bound, a finite-difference
// sectional-curvature oracle, and volume-collapse schedules.
#pragma once

#include <functional>
#include <string>
#include <vector>

namespace fstruct {

// C^2 profile s on [2, 4] with closed-form derivatives. Margin m >= 0: s is
// identically 0 on [2, 2+m] and 1 on [4-m, 4]; m = 0 requires C^2-flat ends.
struct WarpProfile {
    std::string name;
    double margin = 0.0;
    std::function<double(double)> s, ds, dds;

    static WarpProfile quintic();                 // smoothstep on the full interval
    static WarpProfile quintic_margin(double m);  // reparametrized onto [2+m, 4-m]
    static WarpProfile linear_ramp();
    static WarpProfile steep();
    static WarpProfile by_name(const std::string& name);  // throws on unknown
};

struct ProfileReport {
    bool pass = false;
    double max_s = 0, min_s = 0, max_ds = 0, min_dds = 0;
    std::vector<std::string> violations;
};

// Grid check of the hypotheses: 0 <= s <= 1 with the right boundary values,
// monotone, s' <= 1, s'' >= -2, and flat (or C^2-flat) margins.
ProfileReport validate_profile(const WarpProfile& p, int grid_size);

enum class WarpConvention {
    PaperLiteral,  // f = delta^s plugged into the curvature formula
    SquaredWarp,   // f = delta^(s/2), the dt^2 + f^2 h reading of the same metric
};

struct WarpedMetric {
    WarpProfile profile;
    double delta = 0.1;
    double fiber_curvature = 0.0;  // constant K_h of the model fiber
    WarpConvention convention = WarpConvention::PaperLiteral;
};

struct BoundResult {
    double min_value = 0;  // grid minimum of -f''/f - (f')^2/f^2
    double argmin_t = 0;
    double limit = 0;  // -4 log^2(delta)
    bool pass = false;
};

BoundResult curvature_lower_bound(const WarpedMetric& m, int grid_size);

// Bishop-O'Neill value for the plane spanned by x+v, w with g(x,x) = x_weight
// and g(v,v) = v_weight; K_h_plane is the fiber curvature of span(v, w).
double sectional_curvature(const WarpedMetric& m, double t, double x_weight, double v_weight,
                           double K_h_plane);

double warp_f(const WarpedMetric& m, double t);
double warp_df(const WarpedMetric& m, double t);
double warp_ddf(const WarpedMetric& m, double t);

// Coordinate metric field: eval writes the row-major dim x dim matrix at x.
struct MetricField {
    int dim = 0;
    std::function<void(const double*, double*)> eval;
};

MetricField product_flat_field(int fiber_dim);
MetricField exp_warp_field(int fiber_dim);
MetricField warped_torus_field(const WarpProfile& profile, double delta, int fiber_dim);
MetricField sphere_fiber_field(double radius);  // dt^2 + round S^2 of given radius
MetricField scaled_field(const MetricField& base, double c2);

// Second-order finite-difference sectional curvature: Christoffels from central
// differences of the metric, curvature from central differences of the
// Christoffels. Throws on a near-degenerate plane.
double fd_sectional_oracle(const MetricField& field, const std::vector<double>& x,
                           const std::vector<double>& u, const std::vector<double>& v,
                           double step);

struct CollapsePiece {
    std::string name;
    int log_exponent = 0;    // power of |log delta| from the log^2-rescaling
    int collapsed_dims = 0;  // directions with the metric multiplied by delta
    double base_volume = 1.0;
};

struct ScheduleResult {
    std::vector<double> volumes;
    bool divergent = false;             // d = 0: |log delta|^n blows up
    bool eventually_decreasing = false;
    double final_over_first = 0;
};

// volume(delta) = base * |log delta|^n * delta^(d/2) for each delta (descending).
ScheduleResult volume_schedule(const CollapsePiece& piece, const std::vector<double>& deltas);

// Model pieces of the three collapse regions (structure side, fiber-shrunk
// bundle side, gluing neck) with the bundled dimension data.
std::vector<CollapsePiece> theorem_b_pieces();

struct IdentityCheck {
    double max_rel_err_df = 0;
    double max_rel_err_ddf = 0;
};

// f' and f'' closed forms against central differences of f, sampled on the
// interior of the ramp where s' is bounded away from zero.
IdentityCheck check_derivative_identities(const WarpedMetric& m, int npoints, double fd_step);

}  // namespace fstruct
