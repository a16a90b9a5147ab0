#include <string>

#include "semipartm/baselines.hpp"
#include "semipartm/error.hpp"

namespace semipartm {

LsaModel lsa_fit(const Matrix& y, std::size_t n_topics) {
  Svd svd = truncated_svd(y, n_topics);
  return LsaModel{std::move(svd.u), std::move(svd.s), std::move(svd.v)};
}

Matrix lsa_transform(const Matrix& y_new, const LsaModel& model) {
  if (y_new.rows() != model.x.rows()) {
    fail(Errc::DimensionMismatch, "lsa_transform: Y has " + std::to_string(y_new.rows()) +
                                      " rows, model has " + std::to_string(model.x.rows()));
  }
  for (std::size_t k = 0; k < model.s.size(); ++k) {
    if (model.s[k] == 0.0) {
      fail(Errc::SingularValueZero, "lsa_transform: singular value " + std::to_string(k) + " is 0");
    }
  }
  Matrix b = matmul_tn(model.x, y_new);
  for (std::size_t k = 0; k < b.rows(); ++k)
    for (double& v : b.row(k)) v /= model.s[k];
  return b;
}

}  // namespace semipartm
