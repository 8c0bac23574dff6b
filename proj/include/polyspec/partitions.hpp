#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace polyspec {

/// Ordered positive parts summing to k+1.
using Composition = std::vector<int>;

/// Binary m x (k+1) matrix; every column holds exactly one 1 and every row
/// at least one.
class IncidenceMatrix {
public:
    IncidenceMatrix(int rows, int cols);
    /// Builds the matrix whose column c has its 1 in row owner[c].
    static IncidenceMatrix from_owners(int rows, const std::vector<int>& owner);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    bool at(int i, int j) const { return e_[static_cast<std::size_t>(i) * cols_ + j] != 0; }
    /// Row holding the 1 of column j.
    int owner(int j) const { return owner_[j]; }
    int row_sum(int i) const;
    const std::vector<int>& owners() const { return owner_; }

    bool operator==(const IncidenceMatrix& o) const { return rows_ == o.rows_ && owner_ == o.owner_; }

private:
    int rows_, cols_;
    std::vector<std::uint8_t> e_;
    std::vector<int> owner_;
};

/// One cumulant partition: block j collects the {lambda} coordinates marked in
/// row j of A and the {omega} coordinates marked in row j of B.
struct PartitionScheme {
    IncidenceMatrix A;
    IncidenceMatrix B;
    int m;
    std::vector<int> block_orders;  // r_j = r_Aj + r_Bj - 1
};

std::vector<Composition> compositions(int m, int k);
std::vector<IncidenceMatrix> incidence_matrices(const Composition& l, int k);

/// All (A, B) pairs over compositions l, h of k+1 into m parts. With
/// `ordered == false` (the default) pairs that differ only by a simultaneous
/// row permutation are listed once, in the order whose concatenated rows are
/// lexicographically smallest. Results are cached.
const std::vector<PartitionScheme>& partition_schemes(int k, int m, bool ordered = false);

/// Rank of the linear system A{lambda} = B{omega} in the free coordinates
/// (lambda_1..lambda_k, omega_1..omega_k).
int constraint_rank(const PartitionScheme& scheme);

/// All set partitions of {0..n-1} as lists of blocks. Cached.
const std::vector<std::vector<std::vector<int>>>& set_partitions(int n);

std::string to_string(const IncidenceMatrix& M);

}  // namespace polyspec
