#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "glyphforge/error.hpp"
#include "glyphforge/grid.hpp"
#include "glyphforge/knowledge.hpp"
#include "glyphforge/recognition.hpp"
#include "glyphforge/store.hpp"

namespace py = pybind11;
using namespace glyphforge;

namespace {

py::object to_fraction(const Quotient& q) {
    static py::object fraction = py::module_::import("fractions").attr("Fraction");
    return fraction(q.num(), q.den());
}

Quotient to_quotient(const py::handle& value) {
    if (py::isinstance<py::str>(value)) return Quotient::parse(value.cast<std::string>());
    if (py::isinstance<py::float_>(value)) return Quotient::parse(py::repr(value).cast<std::string>());
    if (py::hasattr(value, "numerator") && py::hasattr(value, "denominator")) {
        return Quotient(value.attr("numerator").cast<std::int64_t>(), value.attr("denominator").cast<std::int64_t>());
    }
    throw InvalidArgument("threshold must be a Fraction, int, float or string");
}

std::vector<std::vector<std::int32_t>> weight_rows(const WeightMatrix& w) {
    std::vector<std::vector<std::int32_t>> rows(w.dims().height);
    for (std::size_t r = 0; r < w.dims().height; ++r) {
        for (std::size_t c = 0; c < w.dims().width; ++c) rows[r].push_back(w.at(r, c));
    }
    return rows;
}

}  // namespace

PYBIND11_MODULE(_glyphforge, m) {
    m.doc() = "Glyph digitization, weight-matrix teaching and recognition-quotient classification.";

    auto error = py::register_exception<Error>(m, "Error");
    py::register_exception<InvalidArgument>(m, "InvalidArgument", error);
    py::register_exception<EmptyRaster>(m, "EmptyRaster", error);
    py::register_exception<DimsMismatch>(m, "DimsMismatch", error);
    py::register_exception<InvalidLabel>(m, "InvalidLabel", error);
    py::register_exception<UnknownLabel>(m, "UnknownLabel", error);
    py::register_exception<UndefinedQuotient>(m, "UndefinedQuotient", error);
    py::register_exception<TeachLimit>(m, "TeachLimit", error);
    py::register_exception<ParseError>(m, "ParseError", error);
    py::register_exception<InvariantViolation>(m, "InvariantViolation", error);
    py::register_exception<IoError>(m, "IoError", error);

    py::class_<GridDims>(m, "GridDims")
        .def(py::init(&GridDims::checked), py::arg("width"), py::arg("height"))
        .def_static("parse", &GridDims::parse)
        .def_readonly("width", &GridDims::width)
        .def_readonly("height", &GridDims::height)
        .def("__eq__", [](const GridDims& a, const GridDims& b) { return a == b; })
        .def("__repr__", [](const GridDims& d) { return "GridDims(" + d.to_string() + ")"; });

    py::class_<BinaryGrid>(m, "BinaryGrid")
        .def(py::init([](const std::vector<std::string>& rows) { return BinaryGrid::from_rows(rows); }),
             py::arg("rows"))
        .def_static(
            "from_cells",
            [](std::size_t width, std::size_t height, std::vector<std::uint8_t> cells) {
                return BinaryGrid(GridDims{width, height}, std::move(cells));
            },
            py::arg("width"), py::arg("height"), py::arg("cells"))
        .def_property_readonly("dims", &BinaryGrid::dims)
        .def_property_readonly("cells", [](const BinaryGrid& g) {
            return std::vector<std::uint8_t>(g.cells().begin(), g.cells().end());
        })
        .def("rows", &BinaryGrid::to_rows)
        .def("__eq__", [](const BinaryGrid& a, const BinaryGrid& b) { return a == b; })
        .def("__repr__", [](const BinaryGrid& g) { return "BinaryGrid(" + g.dims().to_string() + ")"; });

    py::class_<Raster>(m, "Raster")
        .def(py::init([](std::size_t width, std::size_t height, std::vector<std::uint8_t> pixels) {
                 return Raster(width, height, std::move(pixels));
             }),
             py::arg("width"), py::arg("height"), py::arg("pixels"))
        .def_property_readonly("width", &Raster::width)
        .def_property_readonly("height", &Raster::height)
        .def_property_readonly("pixels", [](const Raster& r) {
            return std::vector<std::uint8_t>(r.pixels().begin(), r.pixels().end());
        });

    m.def(
        "digitize",
        [](const Raster& raster, GridDims dims, int ink_threshold, double coverage) {
            return digitize(raster, dims, DigitizeOptions{ink_threshold, coverage});
        },
        py::arg("raster"), py::arg("dims"), py::arg("ink_threshold") = 127, py::arg("coverage") = 0.5);
    m.def("render", &render, py::arg("grid"), py::arg("scale"));
    m.def(
        "to_bipolar",
        [](const BinaryGrid& g) {
            const auto b = to_bipolar(g);
            return std::vector<int>(b.cells().begin(), b.cells().end());
        },
        "Row-major list of -1/+1 cells.");
    m.def("black_count", &black_count);

    py::class_<WeightMatrix>(m, "WeightMatrix")
        .def(py::init<GridDims>(), py::arg("dims"))
        .def_static(
            "from_rows",
            [](const std::vector<std::vector<std::int32_t>>& rows, std::int64_t teach_count) {
                if (rows.empty()) throw InvalidArgument("weight matrix has no rows");
                std::vector<std::int32_t> flat;
                for (const auto& row : rows) {
                    if (row.size() != rows.front().size()) throw InvalidArgument("ragged weight rows");
                    flat.insert(flat.end(), row.begin(), row.end());
                }
                return WeightMatrix::from_weights(GridDims{rows.front().size(), rows.size()}, std::move(flat),
                                                  teach_count);
            },
            py::arg("rows"), py::arg("teach_count"))
        .def("learn", &WeightMatrix::learn)
        .def_property_readonly("dims", &WeightMatrix::dims)
        .def_property_readonly("teach_count", &WeightMatrix::teach_count)
        .def("rows", &weight_rows)
        .def("__eq__", [](const WeightMatrix& a, const WeightMatrix& b) { return a == b; });

    py::class_<KnowledgeBase>(m, "KnowledgeBase")
        .def(py::init<GridDims>(), py::arg("dims"))
        .def_property_readonly("dims", &KnowledgeBase::dims)
        .def("teach", [](KnowledgeBase& kb, const std::string& label,
                         const BinaryGrid& pattern) { return kb.teach(Label(label), pattern); })
        .def("forget", [](KnowledgeBase& kb, const std::string& label) { kb.forget(Label(label)); })
        .def("weights", [](const KnowledgeBase& kb, const std::string& label) { return kb.weights(Label(label)); })
        .def("labels", [](const KnowledgeBase& kb) {
            std::vector<std::string> out;
            for (const auto& l : kb.labels()) out.push_back(l.str());
            return out;
        })
        .def("__len__", &KnowledgeBase::size)
        .def("__contains__",
             [](const KnowledgeBase& kb, const std::string& label) {
                 return Label::validate(label).empty() && kb.contains(Label(label));
             })
        .def("__eq__", [](const KnowledgeBase& a, const KnowledgeBase& b) { return a == b; });

    m.def("candidate_score", &candidate_score, py::arg("weights"), py::arg("input"));
    m.def("ideal_score", &ideal_score, py::arg("weights"));
    m.def(
        "recognition_quotient",
        [](const WeightMatrix& w, const BinaryGrid& g) { return to_fraction(recognition_quotient(w, g)); },
        py::arg("weights"), py::arg("input"));

    py::class_<LabelScore>(m, "LabelScore")
        .def_property_readonly("label", [](const LabelScore& s) { return s.label.str(); })
        .def_readonly("psi", &LabelScore::psi)
        .def_readonly("mu", &LabelScore::mu)
        .def_property_readonly("q", [](const LabelScore& s) { return to_fraction(s.q); })
        .def_property_readonly("q_display", [](const LabelScore& s) { return s.q.display(); });

    py::class_<Decision>(m, "Decision")
        .def_property_readonly("kind", [](const Decision& d) { return std::string(to_string(d.kind)); })
        .def_readonly("best", &Decision::best)
        .def_readonly("scores", &Decision::scores)
        .def_property_readonly("unscorable", [](const Decision& d) {
            std::vector<std::string> out;
            for (const auto& l : d.unscorable) out.push_back(l.str());
            return out;
        });

    m.def(
        "classify",
        [](const KnowledgeBase& kb, const BinaryGrid& input, const py::object& threshold) {
            return classify(kb, input, threshold.is_none() ? kDefaultThreshold : to_quotient(threshold));
        },
        py::arg("kb"), py::arg("input"), py::arg("threshold") = py::none());

    m.def("format_kb", &format_kb);
    m.def("parse_kb", [](const std::string& text) { return parse_kb(text); });
    m.def("save_kb", &save_kb, py::arg("kb"), py::arg("path"));
    m.def("load_kb", &load_kb, py::arg("path"));
    m.def("format_glyph", &format_glyph);
    m.def("parse_glyph", [](const std::string& text) { return parse_glyph(text); });
    m.def("parse_raster", [](const py::bytes& data) { return parse_raster(std::string(data)); });
    m.def(
        "load_pattern",
        [](const std::filesystem::path& path, GridDims dims, int ink_threshold, double coverage) {
            return load_pattern(path, dims, DigitizeOptions{ink_threshold, coverage});
        },
        py::arg("path"), py::arg("dims"), py::arg("ink_threshold") = 127, py::arg("coverage") = 0.5);
}
