#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace bpk::nn {

/// Dense row-major tensor. |data| always equals the shape volume.
template <class S>
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<S> data;

    Tensor() = default;

    explicit Tensor(std::vector<std::size_t> shp)
        : shape(std::move(shp)), data(volume(shape), S(0)) {}

    Tensor(std::vector<std::size_t> shp, std::vector<S> values)
        : shape(std::move(shp)), data(std::move(values)) {
        if (data.size() != volume(shape)) {
            throw std::invalid_argument("Tensor: data size does not match shape");
        }
    }

    static std::size_t volume(const std::vector<std::size_t>& shp) {
        std::size_t v = 1;
        for (std::size_t d : shp) v *= d;
        return v;
    }

    std::size_t size() const { return data.size(); }
    S* ptr() { return data.data(); }
    const S* ptr() const { return data.data(); }

    S& operator[](std::size_t i) { return data[i]; }
    const S& operator[](std::size_t i) const { return data[i]; }

    void fill(S value) { data.assign(data.size(), value); }

    bool operator==(const Tensor&) const = default;
};

} // namespace bpk::nn
