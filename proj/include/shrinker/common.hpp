#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <atomic>
#include <cstdlib>
#include <exception>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace shrinker {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;
using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

constexpr double kPi = 3.14159265358979323846;

// Worker count, capped by the SHRINKER_THREADS environment variable.
inline unsigned worker_count() {
    static const unsigned n = [] {
        unsigned hw = std::thread::hardware_concurrency();
        if (hw == 0) hw = 1;
        if (const char* env = std::getenv("SHRINKER_THREADS")) {
            long v = std::strtol(env, nullptr, 10);
            if (v > 0) hw = static_cast<unsigned>(v);
        }
        return hw;
    }();
    return n;
}

// Data-parallel index loop with disjoint writes; result is independent of the
// schedule. Exceptions from workers are rethrown on the calling thread.
template <class F>
void parallel_for(std::size_t n, F&& f) {
    const std::size_t nw = std::min<std::size_t>(worker_count(), n == 0 ? 1 : n);
    if (nw <= 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::atomic<bool> failed{false};
    auto work = [&] {
        constexpr std::size_t block = 32;
        for (;;) {
            std::size_t begin = next.fetch_add(block);
            if (begin >= n || failed.load()) return;
            std::size_t end = std::min(begin + block, n);
            try {
                for (std::size_t i = begin; i < end; ++i) f(i);
            } catch (...) {
                if (!failed.exchange(true)) err = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(nw - 1);
    for (std::size_t t = 1; t < nw; ++t) pool.emplace_back(work);
    work();
    for (auto& th : pool) th.join();
    if (failed.load()) std::rethrow_exception(err);
}

}  // namespace shrinker
