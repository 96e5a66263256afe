#include "gumbelmark/quadrature.hpp"

#include <array>
#include <cmath>
#include <queue>

#include "gumbelmark/error.hpp"

namespace gumbelmark {
namespace {

// Kronrod abscissae on [0,1] of the symmetric rule; odd indices are the Gauss nodes.
constexpr std::array<double, 8> xgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851, 0.864864423359769072789712788640926,
    0.741531185599394439863864773280788, 0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> wgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204, 0.104790010322250183839876322541518,
    0.140653259715525918745189590510238, 0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> wg = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                                      0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Piece {
    double a, b, value, error;
    bool operator<(const Piece& o) const { return error < o.error; }
};

Piece gk15(const std::function<double(double)>& f, double a, double b) {
    const double center = 0.5 * (a + b), half = 0.5 * (b - a);
    const double fc = f(center);
    double kronrod = fc * wgk[7];
    double gauss = fc * wg[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = half * xgk[j];
        const double sum = f(center - dx) + f(center + dx);
        kronrod += wgk[j] * sum;
        if (j % 2 == 1) gauss += wg[j / 2] * sum;
    }
    return {a, b, kronrod * half, std::abs((kronrod - gauss) * half)};
}

}  // namespace

QuadResult integrate(const std::function<double(double)>& f, double a, double b, double abs_tol, int max_intervals) {
    require(b > a, "integration interval must be non-empty");
    require(abs_tol > 0.0, "integration tolerance must be positive");
    std::priority_queue<Piece> heap;
    Piece first = gk15(f, a, b);
    double total = first.value, error = first.error;
    heap.push(first);
    int intervals = 1;
    while (error > abs_tol && intervals < max_intervals) {
        Piece worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (mid <= worst.a || mid >= worst.b) {
            heap.push(worst);
            break;
        }
        Piece left = gk15(f, worst.a, mid), right = gk15(f, mid, worst.b);
        total += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        ++intervals;
    }
    // re-sum to shed the drift of the running updates
    double value = 0.0, err = 0.0;
    for (; !heap.empty(); heap.pop()) {
        value += heap.top().value;
        err += heap.top().error;
    }
    return {value, err, intervals, err <= abs_tol};
}

QuadResult integrate_unit(const std::function<double(double)>& f, double abs_tol) {
    const double edge = std::sqrt(0.5);
    auto near_zero = [&f](double t) { return t == 0.0 ? 0.0 : 2.0 * t * f(t * t); };
    auto near_one = [&f](double t) { return t == 0.0 ? 0.0 : 2.0 * t * f(1.0 - t * t); };
    QuadResult lo = integrate(near_zero, 0.0, edge, 0.5 * abs_tol);
    QuadResult hi = integrate(near_one, 0.0, edge, 0.5 * abs_tol);
    return {lo.value + hi.value, lo.abs_error + hi.abs_error, lo.intervals + hi.intervals,
            lo.converged && hi.converged};
}

}  // namespace gumbelmark
