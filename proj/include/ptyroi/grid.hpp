#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ptyroi {

/// Dense row-major 2-D array. Rows index the first (slow) axis.
template <typename T>
class Grid {
public:
    Grid() = default;
    Grid(std::size_t rows, std::size_t cols, T fill = T{})
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    T& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const T& at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }

    std::span<T> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const T> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    std::span<T> flat() { return {data_.data(), data_.size()}; }
    std::span<const T> flat() const { return {data_.data(), data_.size()}; }

    bool same_shape(const Grid& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

    friend bool operator==(const Grid& a, const Grid& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

}  // namespace ptyroi
