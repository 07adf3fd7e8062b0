#include <cmath>

#include "comphy/neural.hpp"

namespace comphy {

Mlp Mlp::create(std::span<const int> dims, Rng& rng) {
    Mlp m;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        Dense d;
        d.in = dims[l];
        d.out = dims[l + 1];
        d.act = l + 2 == dims.size() ? Activation::Identity : Activation::Relu;
        const double bound = 1.0 / std::sqrt(static_cast<double>(d.in));
        d.w.resize(static_cast<std::size_t>(d.in * d.out));
        for (double& w : d.w) w = rng.uniform(-bound, bound);
        d.b.assign(static_cast<std::size_t>(d.out), 0.0);
        m.layers.push_back(std::move(d));
    }
    return m;
}

std::size_t Mlp::parameter_count() const {
    std::size_t n = 0;
    for (const auto& d : layers) n += d.w.size() + d.b.size();
    return n;
}

namespace {

void dense_forward(const Dense& d, std::span<const double> x, Vec& y) {
    y.assign(static_cast<std::size_t>(d.out), 0.0);
    const std::size_t in = static_cast<std::size_t>(d.in);
    for (std::size_t o = 0; o < y.size(); ++o) {
        const double* row = d.w.data() + o * in;
        double s = d.b[o];
        for (std::size_t i = 0; i < in; ++i) s += row[i] * x[i];
        y[o] = d.act == Activation::Relu && s < 0.0 ? 0.0 : s;
    }
}

}  // namespace

Vec Mlp::forward(std::span<const double> x) const {
    Vec cur(x.begin(), x.end());
    Vec next;
    for (const auto& d : layers) {
        dense_forward(d, cur, next);
        std::swap(cur, next);
    }
    return cur;
}

Vec Mlp::forward(std::span<const double> x, Tape& tape) const {
    tape.values.resize(layers.size() + 1);
    tape.values[0].assign(x.begin(), x.end());
    for (std::size_t l = 0; l < layers.size(); ++l) dense_forward(layers[l], tape.values[l], tape.values[l + 1]);
    return tape.values.back();
}

void Mlp::backward(const Tape& tape, std::span<const double> dy, Mlp& grad, std::span<double> dx) const {
    Vec delta(dy.begin(), dy.end());
    Vec below;
    for (std::size_t l = layers.size(); l-- > 0;) {
        const Dense& d = layers[l];
        Dense& g = grad.layers[l];
        const Vec& x = tape.values[l];
        const Vec& y = tape.values[l + 1];
        const std::size_t in = static_cast<std::size_t>(d.in);
        if (d.act == Activation::Relu)
            for (std::size_t o = 0; o < delta.size(); ++o)
                if (y[o] <= 0.0) delta[o] = 0.0;
        const bool need_below = l > 0 || !dx.empty();
        if (need_below) below.assign(in, 0.0);
        for (std::size_t o = 0; o < delta.size(); ++o) {
            const double dv = delta[o];
            if (dv == 0.0) continue;
            g.b[o] += dv;
            double* grow = g.w.data() + o * in;
            const double* row = d.w.data() + o * in;
            for (std::size_t i = 0; i < in; ++i) grow[i] += dv * x[i];
            if (need_below)
                for (std::size_t i = 0; i < in; ++i) below[i] += dv * row[i];
        }
        if (l == 0) {
            if (!dx.empty())
                for (std::size_t i = 0; i < in; ++i) dx[i] += below[i];
        } else {
            std::swap(delta, below);
        }
    }
}

Mlp Mlp::zeros_like() const {
    Mlp m = *this;
    m.fill(0.0);
    return m;
}

void Mlp::fill(double v) {
    for (auto& d : layers) {
        std::fill(d.w.begin(), d.w.end(), v);
        std::fill(d.b.begin(), d.b.end(), v);
    }
}

void Mlp::add_scaled(const Mlp& other, double scale) {
    for (std::size_t l = 0; l < layers.size(); ++l) {
        auto& d = layers[l];
        const auto& o = other.layers[l];
        for (std::size_t i = 0; i < d.w.size(); ++i) d.w[i] += scale * o.w[i];
        for (std::size_t i = 0; i < d.b.size(); ++i) d.b[i] += scale * o.b[i];
    }
}

bool Mlp::finite() const {
    for (const auto& d : layers) {
        for (double w : d.w)
            if (!std::isfinite(w)) return false;
        for (double b : d.b)
            if (!std::isfinite(b)) return false;
    }
    return true;
}

std::vector<double*> Mlp::parameters() {
    std::vector<double*> out;
    for (auto& d : layers) {
        for (double& w : d.w) out.push_back(&w);
        for (double& b : d.b) out.push_back(&b);
    }
    return out;
}

}  // namespace comphy
