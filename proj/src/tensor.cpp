#include "twk/tensor.hpp"

#include <cmath>
#include <stdexcept>

namespace twk {

SeriesTensor::SeriesTensor(std::size_t batch, std::size_t window,
                           std::size_t features)
    : batch_(batch),
      window_(window),
      features_(features),
      data_(batch * window * features, 0.0) {
  if (batch < 1 || window < 1 || features < 1) {
    throw std::invalid_argument("SeriesTensor: all dimensions must be >= 1");
  }
}

SeriesTensor::SeriesTensor(std::size_t batch, std::size_t window,
                           std::size_t features, std::vector<double> data)
    : batch_(batch), window_(window), features_(features), data_(std::move(data)) {
  if (batch < 1 || window < 1 || features < 1) {
    throw std::invalid_argument("SeriesTensor: all dimensions must be >= 1");
  }
  if (data_.size() != batch * window * features) {
    throw std::invalid_argument("SeriesTensor: data size does not match shape");
  }
}

SeriesTensor SeriesTensor::slice(std::size_t b) const {
  auto src = sample(b);
  return SeriesTensor(1, window_, features_,
                      std::vector<double>(src.begin(), src.end()));
}

void SeriesTensor::requireFinite(const std::string& context) const {
  for (double v : data_) {
    if (!std::isfinite(v)) {
      throw std::runtime_error(context + ": tensor contains non-finite values");
    }
  }
}

}  // namespace twk
