// Python bindings for the core operations: dataset handling, the four miners,
// the NCA objective, the linear trainer, exact/yoked t-SNE, neighbor
// diagnostics and SVG rendering.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "embviz/analysis.hpp"
#include "embviz/dataset.hpp"
#include "embviz/error.hpp"
#include "embviz/mining.hpp"
#include "embviz/objective.hpp"
#include "embviz/render.hpp"
#include "embviz/trainer.hpp"
#include "embviz/tsne.hpp"
#include "embviz/yoke.hpp"

namespace py = pybind11;
using namespace embviz;

namespace {

Matrix matrix_from_array(const py::array_t<double, py::array::c_style | py::array::forcecast>& arr) {
    if (arr.ndim() != 2) throw Error("expected a 2-D array");
    Matrix m(static_cast<std::size_t>(arr.shape(0)), static_cast<std::size_t>(arr.shape(1)));
    const auto view = arr.unchecked<2>();
    for (py::ssize_t i = 0; i < arr.shape(0); ++i)
        for (py::ssize_t j = 0; j < arr.shape(1); ++j)
            m(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = view(i, j);
    return m;
}

py::array_t<double> array_from_matrix(const Matrix& m) {
    py::array_t<double> arr({m.rows(), m.cols()});
    auto view = arr.mutable_unchecked<2>();
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j)
            view(static_cast<py::ssize_t>(i), static_cast<py::ssize_t>(j)) = m(i, j);
    return arr;
}

std::vector<Split> splits_from_strings(const std::vector<std::string>& tags) {
    std::vector<Split> out;
    out.reserve(tags.size());
    for (const auto& tag : tags) {
        const auto split = split_from_string(tag);
        if (!split) throw Error("unknown split tag \"" + tag + "\" (expected train or test)");
        out.push_back(*split);
    }
    return out;
}

std::vector<std::string> strings_from_splits(const std::vector<Split>& splits) {
    std::vector<std::string> out;
    out.reserve(splits.size());
    for (const Split s : splits) out.emplace_back(to_string(s));
    return out;
}

mining::Strategy strategy_from(const std::string& name) {
    const auto strategy = mining::strategy_from_string(name);
    if (!strategy)
        throw Error("unknown strategy \"" + name + "\" (batchall | npairs | semihard | epshn)");
    return *strategy;
}

analysis::Scope scope_from(const std::string& name) {
    const auto scope = analysis::scope_from_string(name);
    if (!scope) throw Error("unknown scope \"" + name + "\" (train | test | all)");
    return *scope;
}

} // namespace

PYBIND11_MODULE(_embviz, m) {
    m.doc() = "Metric-embedding generalization toolkit: triplet mining, NCA training, "
              "exact and yoked t-SNE, similarity diagnostics, SVG rendering";

    py::register_exception<Error>(m, "EmbvizError");

    py::class_<EmbeddingSet>(m, "EmbeddingSet")
        .def(py::init([](std::vector<std::string> ids, std::vector<int> labels,
                         std::vector<std::string> splits, py::array_t<double> vectors) {
                 EmbeddingSet set;
                 set.ids = std::move(ids);
                 set.labels = std::move(labels);
                 set.splits = splits_from_strings(splits);
                 set.vectors = matrix_from_array(vectors);
                 if (set.ids.size() != set.vectors.rows() || set.labels.size() != set.ids.size() ||
                     set.splits.size() != set.ids.size())
                     throw Error("ids, labels, splits and vector rows must have equal length");
                 return set;
             }),
             py::arg("ids"), py::arg("labels"), py::arg("splits"), py::arg("vectors"))
        .def_readonly("ids", &EmbeddingSet::ids)
        .def_readonly("labels", &EmbeddingSet::labels)
        .def_property_readonly("splits",
                               [](const EmbeddingSet& s) { return strings_from_splits(s.splits); })
        .def_property_readonly("vectors",
                               [](const EmbeddingSet& s) { return array_from_matrix(s.vectors); })
        .def_property_readonly("dim", &EmbeddingSet::dim)
        .def("__len__", &EmbeddingSet::size)
        .def("__eq__", [](const EmbeddingSet& a, const EmbeddingSet& b) { return a == b; });

    // dataset
    m.def("gen_synthetic",
          [](int classes, int per_class, int dim, double sigma, std::uint64_t seed) {
              return dataset::gen_synthetic({classes, per_class, dim, sigma, seed});
          },
          py::arg("classes"), py::arg("per_class"), py::arg("dim") = 64,
          py::arg("sigma") = 0.1, py::arg("seed") = 0);
    m.def("load_csv", &dataset::load_csv, py::arg("path"));
    m.def("save_csv", &dataset::save_csv, py::arg("set"), py::arg("path"));
    m.def("normalize_rows", &dataset::normalize_rows, py::arg("set"));
    m.def("split_by_class",
          [](const EmbeddingSet& set, const std::set<int>& train, const std::set<int>& test) {
              return dataset::split_by_class(set, train, test);
          },
          py::arg("set"), py::arg("train_classes"), py::arg("test_classes"));

    // mining (indices are positions within the given batch matrix)
    m.def("mine_batch_all",
          [](py::array_t<double> embeddings, std::vector<int> labels) {
              const Matrix emb = matrix_from_array(embeddings);
              std::vector<std::tuple<std::size_t, std::size_t, std::size_t>> out;
              for (const auto& t : mining::mine_batch_all(emb, labels))
                  out.emplace_back(t.anchor, t.positive, t.negative);
              return out;
          },
          py::arg("embeddings"), py::arg("labels"));
    m.def("mine_npairs",
          [](py::array_t<double> embeddings, std::vector<int> labels) {
              const Matrix emb = matrix_from_array(embeddings);
              std::vector<std::tuple<std::size_t, std::size_t, std::vector<std::size_t>>> out;
              for (const auto& t : mining::mine_npairs(emb, labels))
                  out.emplace_back(t.anchor, t.positive, t.negatives);
              return out;
          },
          py::arg("embeddings"), py::arg("labels"));
    m.def("mine_semi_hard",
          [](py::array_t<double> embeddings, std::vector<int> labels, double margin,
             std::uint64_t seed) {
              const Matrix emb = matrix_from_array(embeddings);
              Rng rng(seed);
              std::vector<std::tuple<std::size_t, std::size_t, std::size_t>> out;
              for (const auto& t : mining::mine_semi_hard(emb, labels, margin, rng))
                  out.emplace_back(t.anchor, t.positive, t.negative);
              return out;
          },
          py::arg("embeddings"), py::arg("labels"), py::arg("margin") = 0.1, py::arg("seed") = 0);
    m.def("mine_epshn",
          [](py::array_t<double> embeddings, std::vector<int> labels, double margin) {
              const Matrix emb = matrix_from_array(embeddings);
              std::vector<std::tuple<std::size_t, std::size_t, std::size_t>> out;
              for (const auto& t : mining::mine_epshn(emb, labels, margin))
                  out.emplace_back(t.anchor, t.positive, t.negative);
              return out;
          },
          py::arg("embeddings"), py::arg("labels"), py::arg("margin") = 0.1);

    // objective
    m.def("nca_loss",
          [](double s_ap, std::vector<double> s_an, double temperature) {
              return objective::nca_loss({s_ap, std::move(s_an)}, temperature);
          },
          py::arg("s_ap"), py::arg("s_an"), py::arg("temperature") = 1.0);
    m.def("nca_grad",
          [](double s_ap, std::vector<double> s_an, double temperature) {
              const objective::NcaGrad g = objective::nca_grad({s_ap, std::move(s_an)}, temperature);
              return std::make_pair(g.d_s_ap, g.d_s_an);
          },
          py::arg("s_ap"), py::arg("s_an"), py::arg("temperature") = 1.0);

    // trainer
    m.def("train_embedder",
          [](const EmbeddingSet& set, std::size_t dim_out, const std::string& strategy,
             double margin, double temperature, int epochs, int batches_per_epoch, std::size_t p,
             std::size_t k, double lr, std::uint64_t seed) {
              trainer::TrainConfig cfg;
              cfg.strategy.strategy = strategy_from(strategy);
              cfg.strategy.margin = margin;
              cfg.temperature = temperature;
              cfg.epochs = epochs;
              cfg.batches_per_epoch = batches_per_epoch;
              cfg.p = p;
              cfg.k = k;
              cfg.learning_rate = lr;
              cfg.seed = seed;
              const trainer::LinearEmbedder init = trainer::init_embedder(set.dim(), dim_out, seed);
              const trainer::TrainResult result = trainer::train(init, set, cfg);
              return std::make_pair(array_from_matrix(result.model.weights), result.loss_trace);
          },
          py::arg("set"), py::arg("dim_out"), py::arg("strategy") = "semihard",
          py::arg("margin") = 0.1, py::arg("temperature") = 1.0, py::arg("epochs") = 50,
          py::arg("batches_per_epoch") = 10, py::arg("p") = 8, py::arg("k") = 4,
          py::arg("lr") = 0.1, py::arg("seed") = 0);
    m.def("embed",
          [](py::array_t<double> weights, const EmbeddingSet& set) {
              trainer::LinearEmbedder model;
              model.weights = matrix_from_array(weights);
              return trainer::embed(model, set);
          },
          py::arg("weights"), py::arg("set"));

    // t-SNE
    py::class_<tsne::TsneConfig>(m, "TsneConfig")
        .def(py::init<>())
        .def_readwrite("perplexity", &tsne::TsneConfig::perplexity)
        .def_readwrite("iterations", &tsne::TsneConfig::iterations)
        .def_readwrite("learning_rate", &tsne::TsneConfig::learning_rate)
        .def_readwrite("momentum_early", &tsne::TsneConfig::momentum_early)
        .def_readwrite("momentum_late", &tsne::TsneConfig::momentum_late)
        .def_readwrite("exaggeration_factor", &tsne::TsneConfig::exaggeration_factor)
        .def_readwrite("exaggeration_iters", &tsne::TsneConfig::exaggeration_iters)
        .def_readwrite("seed", &tsne::TsneConfig::seed)
        .def_readwrite("calibration_tolerance", &tsne::TsneConfig::calibration_tolerance)
        .def_readwrite("calibration_max_iters", &tsne::TsneConfig::calibration_max_iters);
    m.def("tsne_run",
          [](py::array_t<double> vectors, const tsne::TsneConfig& cfg, int threads) {
              const tsne::TsneResult result = tsne::run(matrix_from_array(vectors), cfg, threads);
              return std::make_pair(array_from_matrix(result.coords), result.kl_trace);
          },
          py::arg("vectors"), py::arg("config") = tsne::TsneConfig{}, py::arg("threads") = 1);
    m.def("joint_embed",
          [](const EmbeddingSet& train, const EmbeddingSet& test, const tsne::TsneConfig& cfg,
             int threads) {
              const tsne::JointResult joint = tsne::joint_embed(train, test, cfg, threads);
              return py::make_tuple(array_from_matrix(joint.result.coords),
                                    joint.result.kl_trace, strings_from_splits(joint.splits));
          },
          py::arg("train"), py::arg("test"), py::arg("config") = tsne::TsneConfig{},
          py::arg("threads") = 1);

    // yoked t-SNE
    m.def("yoked_run",
          [](py::array_t<double> vectors_a, py::array_t<double> vectors_b, double lambda_,
             const tsne::TsneConfig& base, int threads) {
              yoke::YokeConfig cfg;
              cfg.lambda = lambda_;
              cfg.base = base;
              const yoke::YokedResult r =
                  yoke::yoked_run(matrix_from_array(vectors_a), matrix_from_array(vectors_b), cfg,
                                  threads);
              return py::make_tuple(array_from_matrix(r.map_a.coords),
                                    array_from_matrix(r.map_b.coords), r.map_a.kl_trace,
                                    r.map_b.kl_trace, r.mean_displacement);
          },
          py::arg("vectors_a"), py::arg("vectors_b"), py::arg("lambda_") = 0.01,
          py::arg("config") = tsne::TsneConfig{}, py::arg("threads") = 1);
    m.def("displacement",
          [](py::array_t<double> map_a, py::array_t<double> map_b) {
              const yoke::Displacement d =
                  yoke::displacement(matrix_from_array(map_a), matrix_from_array(map_b));
              return std::make_pair(d.per_point, d.mean);
          },
          py::arg("map_a"), py::arg("map_b"));

    // analysis
    m.def("recall_at_k",
          [](const EmbeddingSet& set, int k, const std::string& scope) {
              return analysis::recall_at_k(set, k, scope_from(scope));
          },
          py::arg("set"), py::arg("k") = 1, py::arg("scope") = "all");
    m.def("similarity_scatter",
          [](const EmbeddingSet& set, bool cross_split) {
              const analysis::ScatterResult r = analysis::similarity_scatter(set, cross_split);
              py::list points;
              for (const auto& pt : r.points) {
                  py::dict d;
                  d["id"] = pt.id;
                  d["label"] = pt.label;
                  d["split"] = std::string(to_string(pt.split));
                  d["s_same"] = pt.s_same;
                  d["s_diff"] = pt.s_diff;
                  d["correct"] = pt.correct;
                  points.append(d);
              }
              return py::make_tuple(points, r.omitted_ids);
          },
          py::arg("set"), py::arg("cross_split") = false);
    m.def("below_diagonal_fraction",
          [](const std::vector<std::pair<double, double>>& same_diff) {
              std::vector<analysis::ScatterPoint> pts;
              pts.reserve(same_diff.size());
              for (const auto& [s_same, s_diff] : same_diff) {
                  analysis::ScatterPoint pt;
                  pt.s_same = s_same;
                  pt.s_diff = s_diff;
                  pt.correct = s_same > s_diff;
                  pts.push_back(pt);
              }
              return analysis::below_diagonal_fraction(pts);
          },
          py::arg("points"));

    // rendering
    m.def("render_map_panels",
          [](py::array_t<double> coords, std::vector<int> labels, std::vector<std::string> splits) {
              return render::render_map_panels(matrix_from_array(coords), labels,
                                               splits_from_strings(splits), render::PlotStyle{});
          },
          py::arg("coords"), py::arg("labels"), py::arg("splits"));
    m.def("render_scatter",
          [](const std::vector<std::tuple<double, double, bool>>& points) {
              std::vector<analysis::ScatterPoint> pts;
              pts.reserve(points.size());
              for (const auto& [s_same, s_diff, correct] : points) {
                  analysis::ScatterPoint pt;
                  pt.s_same = s_same;
                  pt.s_diff = s_diff;
                  pt.correct = correct;
                  pts.push_back(pt);
              }
              return render::render_scatter(pts, render::PlotStyle{});
          },
          py::arg("points"));
}
