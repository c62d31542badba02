#include "refract/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <vector>

#include "refract/errors.hpp"

namespace refract {

namespace {

constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                           0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
    double a, b, value, error;
    bool operator<(const Panel& o) const { return error < o.error; }
};

// QUADPACK qk15 error heuristic.
Panel rule(const Integrand& f, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(center);
    double resg = fc * kWg[3];
    double resk = fc * kWgk[7];
    double resabs = std::abs(resk);
    double fv1[7], fv2[7];
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kXgk[j];
        fv1[j] = f(center - dx);
        fv2[j] = f(center + dx);
        const double sum = fv1[j] + fv2[j];
        resk += kWgk[j] * sum;
        resabs += kWgk[j] * (std::abs(fv1[j]) + std::abs(fv2[j]));
        if (j % 2 == 1) resg += kWg[j / 2] * sum;
    }
    const double reskh = 0.5 * resk;
    double resasc = kWgk[7] * std::abs(fc - reskh);
    for (int j = 0; j < 7; ++j) resasc += kWgk[j] * (std::abs(fv1[j] - reskh) + std::abs(fv2[j] - reskh));
    resk *= half;
    resabs *= std::abs(half);
    resasc *= std::abs(half);
    double err = std::abs((resk - resg * half));
    if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    constexpr double eps = std::numeric_limits<double>::epsilon();
    if (resabs > std::numeric_limits<double>::min() / (50 * eps)) err = std::max(50 * eps * resabs, err);
    return {a, b, resk, err};
}

}  // namespace

double kronrod15(const Integrand& f, double a, double b) { return rule(f, a, b).value; }

QuadResult integrate_pieces(const Integrand& f, std::span<const double> points, const QuadOptions& opts) {
    QuadResult res;
    if (points.size() < 2) return res;
    if (!std::is_sorted(points.begin(), points.end())) {
        throw DomainError("integrate_pieces: breakpoints must be sorted");
    }

    // An infinite last piece is mapped to [0,1) by x = a + t/(1-t).
    const bool infinite_tail = std::isinf(points.back());
    const double tail_start = infinite_tail ? points[points.size() - 2] : 0.0;
    int evals = 0;
    auto eval_finite = [&](double x) {
        ++evals;
        return f(x);
    };
    auto eval_tail = [&](double t) {
        ++evals;
        const double u = 1.0 - t;
        return f(tail_start + t / u) / (u * u);
    };
    const Integrand finite_fn = eval_finite;
    const Integrand tail_fn = eval_tail;

    struct Tagged {
        Panel p;
        bool tail;
        bool operator<(const Tagged& o) const { return p < o.p; }
    };
    std::priority_queue<Tagged> heap;
    double total = 0.0, total_err = 0.0;
    const std::size_t n_finite = infinite_tail ? points.size() - 2 : points.size() - 1;
    for (std::size_t i = 0; i < n_finite; ++i) {
        if (points[i + 1] == points[i]) continue;
        Panel p = rule(finite_fn, points[i], points[i + 1]);
        total += p.value;
        total_err += p.error;
        heap.push({p, false});
    }
    if (infinite_tail) {
        Panel p = rule(tail_fn, 0.0, 1.0);
        total += p.value;
        total_err += p.error;
        heap.push({p, true});
    }

    auto target = [&] { return std::max(opts.abs_tol, opts.rel_tol * std::abs(total)); };
    int subdivisions = 0;
    while (total_err > target() && !heap.empty() && subdivisions < opts.max_subdivisions) {
        Tagged worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.p.a + worst.p.b);
        if (!(mid > worst.p.a && mid < worst.p.b)) {
            // Panel cannot be split further in floating point.
            heap.push({{worst.p.a, worst.p.b, worst.p.value, 0.0}, worst.tail});
            continue;
        }
        const Integrand& fn = worst.tail ? tail_fn : finite_fn;
        Panel l = rule(fn, worst.p.a, mid);
        Panel r = rule(fn, mid, worst.p.b);
        total += l.value + r.value - worst.p.value;
        total_err += l.error + r.error - worst.p.error;
        heap.push({l, worst.tail});
        heap.push({r, worst.tail});
        ++subdivisions;
    }
    // Re-sum to avoid drift from incremental updates.
    total = 0.0;
    total_err = 0.0;
    std::vector<Tagged> panels;
    panels.reserve(heap.size());
    while (!heap.empty()) {
        panels.push_back(heap.top());
        heap.pop();
    }
    std::sort(panels.begin(), panels.end(), [](const Tagged& x, const Tagged& y) {
        if (x.tail != y.tail) return !x.tail;
        return x.p.a < y.p.a;
    });
    for (const auto& t : panels) {
        total += t.p.value;
        total_err += t.p.error;
    }
    res.value = total;
    res.error = total_err;
    res.evaluations = evals;
    if (!std::isfinite(total)) throw AccuracyError("quadrature produced a non-finite value", total_err);
    if (total_err > target()) throw AccuracyError("quadrature tolerance not reached", total_err);
    return res;
}

QuadResult integrate(const Integrand& f, double a, double b, const QuadOptions& opts) {
    if (b < a) {
        QuadResult r = integrate(f, b, a, opts);
        r.value = -r.value;
        return r;
    }
    const double pts[2] = {a, b};
    return integrate_pieces(f, pts, opts);
}

}  // namespace refract
