#pragma once

#include <cstddef>
#include <functional>

namespace betssm {

// Number of worker threads used by parallel_for. 0 selects the hardware
// concurrency. Results never depend on this value.
void set_thread_count(unsigned n);
unsigned thread_count();

// Calls body(i) for i in [0, n). Work is split into contiguous chunks; the
// first exception thrown by any chunk is rethrown on the calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

// Neumaier-compensated sum in index order.
class CompensatedSum {
public:
    void add(double x);
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

}  // namespace betssm
