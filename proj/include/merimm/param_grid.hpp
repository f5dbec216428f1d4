#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "merimm/error.hpp"

namespace merimm {

/// Uniform grid over [0,1]^m (m <= 2) with a marked subset Q and a
/// hat-function partition of unity centred on a strided subsample (the net).
class ParamGrid {
public:
    ParamGrid() : ParamGrid(std::vector<int>{1}) {}

    explicit ParamGrid(std::vector<int> shape, std::vector<bool> q_mask = {}) : shape_(std::move(shape)) {
        if (shape_.empty() || shape_.size() > 2) throw input_error("grid: dimension must be 1 or 2");
        for (int n : shape_)
            if (n < 1) throw input_error("grid: every axis needs at least one point");
        if (q_mask.empty()) q_mask.assign(size(), false);
        if (q_mask.size() != size()) throw input_error("grid: q_mask length does not match the grid");
        q_mask_ = std::move(q_mask);
    }

    static ParamGrid line(int n, std::vector<bool> q_mask = {}) { return ParamGrid({n}, std::move(q_mask)); }

    /// Q given by a predicate on the parameter tuple.
    static ParamGrid with_q(std::vector<int> shape, const std::function<bool(const std::vector<double>&)>& in_q) {
        ParamGrid g(std::move(shape));
        for (std::size_t i = 0; i < g.size(); ++i) g.q_mask_[i] = in_q(g.point(i));
        return g;
    }

    std::size_t dims() const { return shape_.size(); }
    const std::vector<int>& shape() const { return shape_; }
    std::size_t size() const {
        std::size_t s = 1;
        for (int n : shape_) s *= static_cast<std::size_t>(n);
        return s;
    }
    const std::vector<bool>& q_mask() const { return q_mask_; }
    bool in_q(std::size_t i) const { return q_mask_[i]; }
    bool q_empty() const {
        for (bool b : q_mask_)
            if (b) return false;
        return true;
    }
    int stride() const { return stride_; }

    std::vector<int> multi_index(std::size_t i) const {
        std::vector<int> k(dims());
        for (std::size_t d = 0; d < dims(); ++d) {
            k[d] = static_cast<int>(i % static_cast<std::size_t>(shape_[d]));
            i /= static_cast<std::size_t>(shape_[d]);
        }
        return k;
    }
    std::size_t flat_index(const std::vector<int>& k) const {
        std::size_t i = 0;
        for (std::size_t d = dims(); d-- > 0;) i = i * static_cast<std::size_t>(shape_[d]) + static_cast<std::size_t>(k[d]);
        return i;
    }

    std::vector<double> point(std::size_t i) const {
        const std::vector<int> k = multi_index(i);
        std::vector<double> p(dims());
        for (std::size_t d = 0; d < dims(); ++d) p[d] = shape_[d] == 1 ? 0.0 : static_cast<double>(k[d]) / (shape_[d] - 1);
        return p;
    }

    std::string describe(std::size_t i) const {
        const std::vector<int> k = multi_index(i);
        std::string s = "[";
        for (std::size_t d = 0; d < k.size(); ++d) s += (d ? "," : "") + std::to_string(k[d]);
        return s + "]";
    }

    bool stride_allowed(int s) const {
        if (s < 1) return false;
        for (int n : shape_)
            if (n > 1 && (n - 1) % s != 0) return false;
        return true;
    }

    /// Strides that divide every axis, coarsest first.
    std::vector<int> allowed_strides() const {
        int longest = 1;
        for (int n : shape_) longest = std::max(longest, n - 1);
        std::vector<int> out;
        for (int s = longest; s >= 1; --s)
            if (stride_allowed(s)) out.push_back(s);
        return out;
    }

    ParamGrid with_stride(int s) const {
        if (!stride_allowed(s)) throw input_error("grid: stride " + std::to_string(s) + " does not divide the grid");
        ParamGrid g = *this;
        g.stride_ = s;
        return g;
    }

    bool is_node(std::size_t i) const {
        const std::vector<int> k = multi_index(i);
        for (int v : k)
            if (v % stride_ != 0) return false;
        return true;
    }

    std::vector<std::size_t> nodes() const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < size(); ++i)
            if (is_node(i)) out.push_back(i);
        return out;
    }

    /// Nonzero partition-of-unity weights at grid point i as (node, weight),
    /// ordered by node index.
    std::vector<std::pair<std::size_t, double>> weights(std::size_t i) const {
        const std::vector<int> k = multi_index(i);
        std::vector<std::vector<std::pair<int, double>>> axis(dims());
        for (std::size_t d = 0; d < dims(); ++d) {
            const int lo = (k[d] / stride_) * stride_;
            const double t = static_cast<double>(k[d] - lo) / stride_;
            axis[d].push_back({lo, 1.0 - t});
            if (t > 0.0) axis[d].push_back({lo + stride_, t});
        }
        std::vector<std::pair<std::size_t, double>> out;
        if (dims() == 1) {
            for (auto [n, w] : axis[0]) out.push_back({flat_index({n}), w});
        } else {
            for (auto [n1, w1] : axis[1])
                for (auto [n0, w0] : axis[0]) out.push_back({flat_index({n0, n1}), w0 * w1});
        }
        return out;
    }

    /// Grid points where the weight of node j is positive.
    std::vector<std::size_t> support(std::size_t node) const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < size(); ++i)
            for (auto [n, w] : weights(i))
                if (n == node && w > 0.0) out.push_back(i);
        return out;
    }

    /// Index-adjacent pairs (i, j), i < j, along every axis.
    std::vector<std::pair<std::size_t, std::size_t>> adjacent_pairs() const {
        std::vector<std::pair<std::size_t, std::size_t>> out;
        for (std::size_t i = 0; i < size(); ++i) {
            std::vector<int> k = multi_index(i);
            for (std::size_t d = 0; d < dims(); ++d) {
                if (k[d] + 1 >= shape_[d]) continue;
                ++k[d];
                out.push_back({i, flat_index(k)});
                --k[d];
            }
        }
        return out;
    }

    friend bool operator==(const ParamGrid&, const ParamGrid&) = default;

private:
    std::vector<int> shape_;
    std::vector<bool> q_mask_;
    int stride_ = 1;
};

}  // namespace merimm
