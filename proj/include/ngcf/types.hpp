#pragma once

#include <cstdint>
#include <limits>

#include <Eigen/Core>

namespace ngcf {

using WordId = std::uint32_t;
using RowId = std::uint32_t;
using ClusterId = std::int32_t;
using Count = std::int64_t;

inline constexpr WordId kUnkId = 0;
inline constexpr ClusterId kNoCluster = -1;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using CountMatrix = Matrix<Count>;
using CountVector = Vector<Count>;

/// Which side of the event table an element lives on: rows are M-word
/// contexts (clustered by G1), columns are predicted words (clustered by G2).
enum class Side { Row, Column };

inline constexpr Side opposite(Side s) { return s == Side::Row ? Side::Column : Side::Row; }

}  // namespace ngcf
