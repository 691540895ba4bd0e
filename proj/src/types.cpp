#include "bgsm/types.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bgsm/error.hpp"

namespace bgsm {

GroupStructure::GroupStructure(std::vector<std::vector<Index>> members, Index d,
                               std::vector<std::string> labels)
    : members_(std::move(members)), group_of_(static_cast<std::size_t>(d), -1),
      labels_(std::move(labels)) {
  if (d <= 0) throw InputError("group structure needs at least one SNP");
  for (std::size_t k = 0; k < members_.size(); ++k) {
    if (members_[k].empty()) {
      throw InputError("group " + std::to_string(k) + " has no SNPs");
    }
    for (Index i : members_[k]) {
      if (i < 0 || i >= d) {
        throw InputError("SNP index " + std::to_string(i) + " outside 0.." +
                         std::to_string(d - 1));
      }
      if (group_of_[i] != -1) {
        throw InputError("SNP index " + std::to_string(i) + " assigned to two groups");
      }
      group_of_[i] = static_cast<Index>(k);
    }
  }
  for (Index i = 0; i < d; ++i) {
    if (group_of_[i] == -1) {
      throw InputError("SNP index " + std::to_string(i) + " belongs to no group");
    }
  }
  if (labels_.empty()) {
    for (std::size_t k = 0; k < members_.size(); ++k) labels_.push_back("gene" + std::to_string(k));
  } else if (labels_.size() != members_.size()) {
    throw InputError("group label count does not match group count");
  }
}

GroupStructure GroupStructure::from_assignment(std::span<const Index> group_of,
                                               std::vector<std::string> labels) {
  Index num_groups = 0;
  for (Index g : group_of) {
    if (g < 0) throw InputError("negative group id");
    num_groups = std::max(num_groups, g + 1);
  }
  std::vector<std::vector<Index>> members(static_cast<std::size_t>(num_groups));
  for (std::size_t i = 0; i < group_of.size(); ++i) members[group_of[i]].push_back(static_cast<Index>(i));
  return GroupStructure(std::move(members), static_cast<Index>(group_of.size()), std::move(labels));
}

GroupStructure GroupStructure::contiguous(std::span<const Index> sizes) {
  std::vector<std::vector<Index>> members;
  Index next = 0;
  for (Index m : sizes) {
    if (m <= 0) throw InputError("group sizes must be positive");
    std::vector<Index> block(static_cast<std::size_t>(m));
    for (Index r = 0; r < m; ++r) block[r] = next++;
    members.push_back(std::move(block));
  }
  return GroupStructure(std::move(members), next);
}

std::vector<Index> GroupStructure::sizes() const {
  std::vector<Index> out;
  out.reserve(members_.size());
  for (const auto& g : members_) out.push_back(static_cast<Index>(g.size()));
  return out;
}

void Dataset::validate(bool require_standardized) const {
  if (x.rows() != y.rows()) {
    std::ostringstream msg;
    msg << "genotype rows (" << x.rows() << ") != phenotype rows (" << y.rows() << ")";
    throw InputError(msg.str());
  }
  if (groups.num_snps() != x.cols()) {
    std::ostringstream msg;
    msg << "group structure covers " << groups.num_snps() << " SNPs but X has " << x.cols()
        << " columns";
    throw InputError(msg.str());
  }
  if (y.cols() == 0) throw InputError("phenotype matrix has no columns");
  for (Index j = 0; j < x.cols(); ++j) {
    for (Index l = 0; l < x.rows(); ++l) {
      const double v = x(l, j);
      if (v != 0.0 && v != 1.0 && v != 2.0) {
        std::ostringstream msg;
        msg << "genotype X(" << l << "," << j << ") = " << v << " is not in {0,1,2}";
        throw InputError(msg.str());
      }
    }
  }
  if (!y.allFinite()) throw InputError("phenotype matrix contains non-finite values");
  if (!snp_names.empty() && static_cast<Index>(snp_names.size()) != x.cols()) {
    throw InputError("SNP name count does not match genotype columns");
  }
  if (!phenotype_names.empty() && static_cast<Index>(phenotype_names.size()) != y.cols()) {
    throw InputError("phenotype name count does not match phenotype columns");
  }
  if (require_standardized) {
    const double n = static_cast<double>(y.rows());
    for (Index j = 0; j < y.cols(); ++j) {
      const double mean = y.col(j).mean();
      const double var = (y.col(j).array() - mean).square().sum() / (n - 1.0);
      if (std::abs(mean) > 1e-8 || std::abs(var - 1.0) > 1e-8) {
        throw InputError("phenotype column " + std::to_string(j) + " is not standardized");
      }
    }
  }
}

void Dataset::ensure_names() {
  if (snp_names.empty()) {
    for (Index i = 0; i < x.cols(); ++i) snp_names.push_back("snp" + std::to_string(i));
  }
  if (phenotype_names.empty()) {
    for (Index j = 0; j < y.cols(); ++j) phenotype_names.push_back("pheno" + std::to_string(j));
  }
}

MixingState MixingState::ones(Index num_groups, Index num_snps) {
  return {Vector::Ones(num_groups), Vector::Ones(num_snps), 1.0};
}

void MixingState::validate() const {
  auto positive = [](const Vector& v) {
    return (v.array() > 0.0).all() && v.allFinite();
  };
  if (!positive(tau2) || !positive(omega2) || !(sigma2 > 0.0) || !std::isfinite(sigma2)) {
    throw DomainError("mixing state must be strictly positive and finite");
  }
}

void Hyperparams::validate() const {
  for (double v : {lambda1_sq, lambda2_sq, a_sigma, b_sigma}) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw DomainError("hyperparameters must be strictly positive and finite");
    }
  }
}

Matrix ChainOutput::posterior_mean() const {
  if (w.empty()) throw InputError("chain has no stored draws");
  Matrix mean = Matrix::Zero(w.front().rows(), w.front().cols());
  for (const auto& draw : w) mean += draw;
  return mean / static_cast<double>(w.size());
}

}  // namespace bgsm
