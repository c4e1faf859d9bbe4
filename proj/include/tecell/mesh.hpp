#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tecell {

using Vec2 = std::array<double, 2>;

inline double dot(const Vec2& a, const Vec2& b) { return a[0] * b[0] + a[1] * b[1]; }

enum class Region : std::uint8_t { Anode, Separator, Cathode };

/// Face classification. Interior faces between an electrode cell and a
/// separator cell are SeparatorInterface: they are internal to the mesh but
/// lie on the boundary of the electrode subdomain, where the solid potential
/// carries zero flux.
enum class BoundaryTag : std::uint8_t { Interior, GammaA, GammaC, Insulated, SeparatorInterface };

/// Region or region union accepted by region_measure.
enum class RegionSet { Anode, Separator, Cathode, Electrodes, Whole };

std::string_view to_string(Region region);
std::string_view to_string(BoundaryTag tag);

inline bool is_electrode(Region region) { return region != Region::Separator; }

struct Cell {
    Vec2 centroid{};
    double measure = 0.0;
    Region region = Region::Anode;
};

struct Face {
    int left = -1;   ///< owning cell; for boundary faces the only cell
    int right = -1;  ///< -1 on the outer boundary of the domain
    Vec2 centroid{};
    Vec2 normal{};   ///< unit normal pointing from left to right (outward on the boundary)
    double measure = 0.0;
    BoundaryTag tag = BoundaryTag::Interior;

    bool on_boundary() const { return right < 0; }
};

struct SandwichLengths {
    double anode = 1.0;
    double separator = 1.0;
    double cathode = 1.0;
};

struct SandwichCells {
    int anode = 1;
    int separator = 1;
    int cathode = 1;
};

/// Second (transverse) dimension of a 2D tensor grid.
struct TransverseExtent {
    double width = 1.0;
    int cells = 1;
};

/// Cell-centered tensor mesh of the layered domain anode | separator | cathode.
/// Immutable after construction.
class Mesh {
public:
    Mesh(int dimension, std::vector<Cell> cells, std::vector<Face> faces, SandwichLengths lengths,
         SandwichCells counts, std::optional<TransverseExtent> transverse);

    int dimension() const { return dimension_; }
    std::size_t num_cells() const { return cells_.size(); }
    std::size_t num_faces() const { return faces_.size(); }
    std::span<const Cell> cells() const { return cells_; }
    std::span<const Face> faces() const { return faces_; }
    const Cell& cell(int index) const { return cells_[static_cast<std::size_t>(index)]; }
    const Face& face(int index) const { return faces_[static_cast<std::size_t>(index)]; }

    /// Faces adjacent to a cell.
    std::span<const int> cell_faces(int cell) const;

    /// Global indices of the electrode cells, in mesh order. Fields living on
    /// the electrodes are stored compactly in this order.
    std::span<const int> electrode_cells() const { return electrode_cells_; }
    std::size_t num_electrode_cells() const { return electrode_cells_.size(); }
    /// Position of a cell in the electrode ordering, or -1 for separator cells.
    int electrode_index(int cell) const { return electrode_index_[static_cast<std::size_t>(cell)]; }

    const SandwichLengths& lengths() const { return lengths_; }
    const SandwichCells& counts() const { return counts_; }
    const std::optional<TransverseExtent>& transverse() const { return transverse_; }
    double total_length() const { return lengths_.anode + lengths_.separator + lengths_.cathode; }

    /// Distance from a cell centroid to a face, measured along the face normal.
    double normal_distance(int cell, int face) const;

private:
    int dimension_;
    std::vector<Cell> cells_;
    std::vector<Face> faces_;
    std::vector<int> face_offsets_;
    std::vector<int> face_list_;
    std::vector<int> electrode_cells_;
    std::vector<int> electrode_index_;
    SandwichLengths lengths_;
    SandwichCells counts_;
    std::optional<TransverseExtent> transverse_;
};

/// Uniform cells per region; 1D unless a transverse extent is given.
/// Throws ConfigError naming the offending field for non-positive input.
Mesh build_sandwich_mesh(SandwichLengths lengths, SandwichCells cells,
                         std::optional<TransverseExtent> transverse = std::nullopt);

double region_measure(const Mesh& mesh, RegionSet set);

/// Plain-text region table: tag, cell count, measure.
std::string mesh_summary(const Mesh& mesh);

}  // namespace tecell
