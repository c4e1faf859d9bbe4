#include "tecell/mesh.hpp"

#include "tecell/errors.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

namespace tecell {

std::string_view to_string(Region region)
{
    switch (region) {
    case Region::Anode: return "anode";
    case Region::Separator: return "separator";
    case Region::Cathode: return "cathode";
    }
    return "unknown";
}

std::string_view to_string(BoundaryTag tag)
{
    switch (tag) {
    case BoundaryTag::Interior: return "interior";
    case BoundaryTag::GammaA: return "gamma_a";
    case BoundaryTag::GammaC: return "gamma_c";
    case BoundaryTag::Insulated: return "insulated";
    case BoundaryTag::SeparatorInterface: return "separator_interface";
    }
    return "unknown";
}

Mesh::Mesh(int dimension, std::vector<Cell> cells, std::vector<Face> faces, SandwichLengths lengths,
           SandwichCells counts, std::optional<TransverseExtent> transverse)
    : dimension_(dimension),
      cells_(std::move(cells)),
      faces_(std::move(faces)),
      lengths_(lengths),
      counts_(counts),
      transverse_(transverse)
{
    std::vector<int> degree(cells_.size(), 0);
    for (const Face& f : faces_) {
        ++degree[static_cast<std::size_t>(f.left)];
        if (!f.on_boundary())
            ++degree[static_cast<std::size_t>(f.right)];
    }
    face_offsets_.assign(cells_.size() + 1, 0);
    for (std::size_t c = 0; c < cells_.size(); ++c)
        face_offsets_[c + 1] = face_offsets_[c] + degree[c];
    face_list_.assign(static_cast<std::size_t>(face_offsets_.back()), -1);
    std::vector<int> fill(face_offsets_.begin(), face_offsets_.end() - 1);
    for (std::size_t i = 0; i < faces_.size(); ++i) {
        const Face& f = faces_[i];
        face_list_[static_cast<std::size_t>(fill[static_cast<std::size_t>(f.left)]++)] = static_cast<int>(i);
        if (!f.on_boundary())
            face_list_[static_cast<std::size_t>(fill[static_cast<std::size_t>(f.right)]++)] = static_cast<int>(i);
    }

    electrode_index_.assign(cells_.size(), -1);
    for (std::size_t c = 0; c < cells_.size(); ++c) {
        if (is_electrode(cells_[c].region)) {
            electrode_index_[c] = static_cast<int>(electrode_cells_.size());
            electrode_cells_.push_back(static_cast<int>(c));
        }
    }
}

std::span<const int> Mesh::cell_faces(int cell) const
{
    const auto c = static_cast<std::size_t>(cell);
    return std::span<const int>(face_list_).subspan(
        static_cast<std::size_t>(face_offsets_[c]),
        static_cast<std::size_t>(face_offsets_[c + 1] - face_offsets_[c]));
}

double Mesh::normal_distance(int cell, int face) const
{
    const Face& f = faces_[static_cast<std::size_t>(face)];
    const Cell& c = cells_[static_cast<std::size_t>(cell)];
    const Vec2 d{f.centroid[0] - c.centroid[0], f.centroid[1] - c.centroid[1]};
    return std::abs(dot(d, f.normal));
}

namespace {

void require_positive(double value, const char* name)
{
    if (!(value > 0.0) || !std::isfinite(value))
        throw ConfigError(std::string(name) + " must be positive");
}

void require_positive(int value, const char* name)
{
    if (value <= 0)
        throw ConfigError(std::string(name) + " must be positive");
}

BoundaryTag interior_tag(Region a, Region b)
{
    if (is_electrode(a) != is_electrode(b))
        return BoundaryTag::SeparatorInterface;
    return BoundaryTag::Interior;
}

}  // namespace

Mesh build_sandwich_mesh(SandwichLengths lengths, SandwichCells counts,
                         std::optional<TransverseExtent> transverse)
{
    require_positive(lengths.anode, "L_a");
    require_positive(lengths.separator, "L_s");
    require_positive(lengths.cathode, "L_c");
    require_positive(counts.anode, "n_a");
    require_positive(counts.separator, "n_s");
    require_positive(counts.cathode, "n_c");
    if (transverse) {
        require_positive(transverse->width, "width");
        require_positive(transverse->cells, "n_y");
    }

    // x-direction layout: per-region uniform spacing.
    struct Column {
        double center;
        double width;
        Region region;
    };
    std::vector<Column> columns;
    std::vector<double> nodes{0.0};
    const std::array<std::pair<int, double>, 3> blocks{{{counts.anode, lengths.anode},
                                                        {counts.separator, lengths.separator},
                                                        {counts.cathode, lengths.cathode}}};
    const std::array<Region, 3> regions{Region::Anode, Region::Separator, Region::Cathode};
    double offset = 0.0;
    for (std::size_t b = 0; b < 3; ++b) {
        const auto [n, len] = blocks[b];
        const double h = len / n;
        for (int i = 0; i < n; ++i) {
            const double left = offset + i * h;
            columns.push_back({left + 0.5 * h, h, regions[b]});
            nodes.push_back(i + 1 == n ? offset + len : left + h);
        }
        offset += len;
    }

    const int nx = static_cast<int>(columns.size());
    const int ny = transverse ? transverse->cells : 1;
    const double dy = transverse ? transverse->width / ny : 1.0;
    const int dimension = transverse ? 2 : 1;

    std::vector<Cell> cells;
    cells.reserve(static_cast<std::size_t>(nx * ny));
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const Column& col = columns[static_cast<std::size_t>(i)];
            Cell c;
            c.centroid = {col.center, transverse ? (j + 0.5) * dy : 0.0};
            c.measure = col.width * dy;
            c.region = col.region;
            cells.push_back(c);
        }
    }
    auto id = [nx](int i, int j) { return j * nx + i; };

    std::vector<Face> faces;
    for (int j = 0; j < ny; ++j) {
        const double yc = transverse ? (j + 0.5) * dy : 0.0;
        for (int i = 0; i <= nx; ++i) {
            Face f;
            f.centroid = {nodes[static_cast<std::size_t>(i)], yc};
            f.measure = dy;
            if (i == 0) {
                f.left = id(0, j);
                f.normal = {-1.0, 0.0};
                f.tag = BoundaryTag::GammaA;
            } else if (i == nx) {
                f.left = id(nx - 1, j);
                f.normal = {1.0, 0.0};
                f.tag = BoundaryTag::GammaC;
            } else {
                f.left = id(i - 1, j);
                f.right = id(i, j);
                f.normal = {1.0, 0.0};
                f.tag = interior_tag(columns[static_cast<std::size_t>(i - 1)].region,
                                     columns[static_cast<std::size_t>(i)].region);
            }
            faces.push_back(f);
        }
    }
    if (transverse) {
        for (int i = 0; i < nx; ++i) {
            const Column& col = columns[static_cast<std::size_t>(i)];
            for (int j = 0; j <= ny; ++j) {
                Face f;
                f.centroid = {col.center, j * dy};
                f.measure = col.width;
                if (j == 0) {
                    f.left = id(i, 0);
                    f.normal = {0.0, -1.0};
                    f.tag = BoundaryTag::Insulated;
                } else if (j == ny) {
                    f.left = id(i, ny - 1);
                    f.normal = {0.0, 1.0};
                    f.tag = BoundaryTag::Insulated;
                } else {
                    f.left = id(i, j - 1);
                    f.right = id(i, j);
                    f.normal = {0.0, 1.0};
                    f.tag = BoundaryTag::Interior;
                }
                faces.push_back(f);
            }
        }
    }
    return Mesh(dimension, std::move(cells), std::move(faces), lengths, counts, transverse);
}

double region_measure(const Mesh& mesh, RegionSet set)
{
    double total = 0.0;
    for (const Cell& c : mesh.cells()) {
        bool include = false;
        switch (set) {
        case RegionSet::Anode: include = c.region == Region::Anode; break;
        case RegionSet::Separator: include = c.region == Region::Separator; break;
        case RegionSet::Cathode: include = c.region == Region::Cathode; break;
        case RegionSet::Electrodes: include = is_electrode(c.region); break;
        case RegionSet::Whole: include = true; break;
        }
        if (include)
            total += c.measure;
    }
    return total;
}

std::string mesh_summary(const Mesh& mesh)
{
    std::ostringstream out;
    out << "mesh: " << mesh.dimension() << "D, " << mesh.num_cells() << " cells, " << mesh.num_faces()
        << " faces\n";
    out << std::left << std::setw(12) << "region" << std::setw(8) << "cells"
        << "measure\n";
    const std::array<std::pair<Region, RegionSet>, 3> rows{{{Region::Anode, RegionSet::Anode},
                                                            {Region::Separator, RegionSet::Separator},
                                                            {Region::Cathode, RegionSet::Cathode}}};
    for (const auto& [region, set] : rows) {
        std::size_t count = 0;
        for (const Cell& c : mesh.cells())
            count += c.region == region ? 1 : 0;
        out << std::left << std::setw(12) << to_string(region) << std::setw(8) << count
            << std::setprecision(12) << region_measure(mesh, set) << "\n";
    }
    out << std::left << std::setw(12) << "total" << std::setw(8) << mesh.num_cells()
        << std::setprecision(12) << region_measure(mesh, RegionSet::Whole) << "\n";
    return out.str();
}

}  // namespace tecell
