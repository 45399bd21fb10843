#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <tuple>
#include <vector>

#include "avdiar/cluster.hpp"
#include "avdiar/config.hpp"
#include "avdiar/corpus.hpp"
#include "avdiar/error.hpp"
#include "avdiar/pipeline.hpp"
#include "avdiar/relation.hpp"
#include "avdiar/rttm.hpp"
#include "avdiar/scoring.hpp"
#include "avdiar/train.hpp"

namespace py = pybind11;
using namespace avdiar;

namespace {

Diarization to_diarization(const std::vector<RttmRecord>& records) {
  return normalize_diarization(records);
}

}  // namespace

PYBIND11_MODULE(_avdiar, m) {
  m.doc() = "audio-visual speaker diarization core";

  py::register_exception<Error>(m, "AvdiarError");

  py::enum_<Linkage>(m, "Linkage")
      .value("AVERAGE", Linkage::kAverage)
      .value("SINGLE", Linkage::kSingle)
      .value("COMPLETE", Linkage::kComplete);

  py::class_<Config>(m, "Config")
      .def(py::init<>())
      .def_readwrite("sample_rate", &Config::sample_rate)
      .def_readwrite("window_s", &Config::window_s)
      .def_readwrite("stride_s", &Config::stride_s)
      .def_readwrite("missing_prob", &Config::missing_prob)
      .def_readwrite("lr", &Config::lr)
      .def_readwrite("iterations", &Config::iterations)
      .def_readwrite("batch_size", &Config::batch_size)
      .def_readwrite("eval_every", &Config::eval_every)
      .def_readwrite("collar_s", &Config::collar_s)
      .def_readwrite("c_audio", &Config::c_audio)
      .def_readwrite("c_face", &Config::c_face)
      .def_readwrite("h", &Config::h)
      .def_readwrite("w", &Config::w)
      .def_readwrite("linkage", &Config::linkage)
      .def_readwrite("threshold_grid", &Config::threshold_grid)
      .def_readwrite("seed", &Config::seed);
  m.def("load_config", &load_config, py::arg("text"));
  m.def("validate_config", &validate_config, py::arg("config"));

  py::class_<RttmRecord>(m, "RttmRecord")
      .def(py::init([](std::string file_id, double onset, double offset,
                       std::string speaker, int channel) {
             return RttmRecord{std::move(file_id), channel,
                               TimeInterval{onset, offset},
                               std::move(speaker)};
           }),
           py::arg("file_id"), py::arg("onset"), py::arg("offset"),
           py::arg("speaker"), py::arg("channel") = 1)
      .def_readwrite("file_id", &RttmRecord::file_id)
      .def_readwrite("channel", &RttmRecord::channel)
      .def_readwrite("speaker", &RttmRecord::speaker)
      .def_property(
          "onset", [](const RttmRecord& r) { return r.interval.onset; },
          [](RttmRecord& r, double v) { r.interval.onset = v; })
      .def_property(
          "offset", [](const RttmRecord& r) { return r.interval.offset; },
          [](RttmRecord& r, double v) { r.interval.offset = v; })
      .def("__repr__", [](const RttmRecord& r) {
        return "RttmRecord('" + r.file_id + "', " +
               std::to_string(r.interval.onset) + ", " +
               std::to_string(r.interval.offset) + ", '" + r.speaker + "')";
      });

  m.def(
      "parse_rttm",
      [](const std::string& text) {
        RttmParseResult result = parse_rttm(text);
        return std::make_tuple(result.records, result.skipped_records);
      },
      py::arg("text"), "Returns (records, skipped_record_count).");
  m.def(
      "parse_rttm_file",
      [](const std::string& path) {
        RttmParseResult result = parse_rttm_file(path);
        return std::make_tuple(result.records, result.skipped_records);
      },
      py::arg("path"));
  m.def("serialize_rttm", &serialize_rttm, py::arg("records"));
  m.def("write_rttm_file", &write_rttm_file, py::arg("path"),
        py::arg("records"));

  py::class_<DerBreakdown>(m, "DerBreakdown")
      .def_readonly("file_id", &DerBreakdown::file_id)
      .def_readonly("scored_speech", &DerBreakdown::scored_speech)
      .def_readonly("missed", &DerBreakdown::missed)
      .def_readonly("false_alarm", &DerBreakdown::false_alarm)
      .def_readonly("confusion", &DerBreakdown::confusion)
      .def_readonly("missed_pct", &DerBreakdown::missed_pct)
      .def_readonly("false_alarm_pct", &DerBreakdown::false_alarm_pct)
      .def_readonly("confusion_pct", &DerBreakdown::confusion_pct)
      .def_readonly("der_pct", &DerBreakdown::der_pct)
      .def_readonly("mapping", &DerBreakdown::mapping)
      .def("__repr__", [](const DerBreakdown& d) {
        return "DerBreakdown('" + d.file_id +
               "', der_pct=" + std::to_string(d.der_pct) + ")";
      });

  m.def(
      "compute_der",
      [](const std::vector<RttmRecord>& ref, const std::vector<RttmRecord>& hyp,
         double collar, bool score_overlap) {
        return compute_der(to_diarization(ref), to_diarization(hyp), collar,
                           score_overlap);
      },
      py::arg("ref"), py::arg("hyp"), py::arg("collar") = 0.25,
      py::arg("score_overlap") = true);
  m.def(
      "brute_force_der",
      [](const std::vector<RttmRecord>& ref, const std::vector<RttmRecord>& hyp,
         double collar, bool score_overlap) {
        return brute_force_der(to_diarization(ref), to_diarization(hyp), collar,
                               score_overlap);
      },
      py::arg("ref"), py::arg("hyp"), py::arg("collar") = 0.25,
      py::arg("score_overlap") = true);
  m.def("aggregate_der", &aggregate_der, py::arg("parts"));

  py::class_<RelationModel>(m, "RelationModel")
      .def_readonly("c_audio", &RelationModel::c_audio)
      .def_readonly("c_face", &RelationModel::c_face)
      .def_readonly("h", &RelationModel::h)
      .def_readonly("w", &RelationModel::w)
      .def_property_readonly(
          "n_params", [](const RelationModel& m_) { return m_.params.size(); });
  m.def("init_model", &init_model, py::arg("config"), py::arg("seed"));

  py::class_<Checkpoint>(m, "Checkpoint")
      .def(py::init([](RelationModel model, double threshold) {
             return Checkpoint{std::move(model), threshold};
           }),
           py::arg("model"), py::arg("threshold"))
      .def_readwrite("model", &Checkpoint::model)
      .def_readwrite("threshold", &Checkpoint::threshold);
  m.def("save_checkpoint", &save_checkpoint, py::arg("checkpoint"),
        py::arg("path"));
  m.def("load_checkpoint", &load_checkpoint, py::arg("path"));

  py::class_<SyntheticCorpus>(m, "SyntheticCorpus")
      .def_readonly("noise_sigma", &SyntheticCorpus::noise_sigma)
      .def_readonly("seed", &SyntheticCorpus::seed)
      .def_property_readonly(
          "video_ids",
          [](const SyntheticCorpus& c) {
            std::vector<std::string> ids;
            for (const auto& v : c.videos) ids.push_back(v.id);
            return ids;
          })
      .def("__len__",
           [](const SyntheticCorpus& c) { return c.videos.size(); })
      .def(
          "reference",
          [](const SyntheticCorpus& c, const std::string& video_id) {
            const CorpusVideo* video = c.find_video(video_id);
            if (video == nullptr) throw Error("no video '" + video_id + "'");
            return to_records(video->reference);
          },
          py::arg("video_id"));

  m.def(
      "generate_corpus",
      [](int n_videos, int min_speakers, int max_speakers,
         double off_screen_fraction, int segs_per_speaker, double noise_sigma,
         std::uint64_t seed, int c_audio, int c_face, int h, int w) {
        CorpusParams params;
        params.n_videos = n_videos;
        params.min_speakers = min_speakers;
        params.max_speakers = max_speakers;
        params.off_screen_fraction = off_screen_fraction;
        params.segs_per_speaker = segs_per_speaker;
        params.noise_sigma = noise_sigma;
        params.seed = seed;
        params.c_audio = c_audio;
        params.c_face = c_face;
        params.h = h;
        params.w = w;
        return make_synthetic_corpus(params);
      },
      py::arg("n_videos") = 10, py::arg("min_speakers") = 2,
      py::arg("max_speakers") = 6, py::arg("off_screen_fraction") = 0.25,
      py::arg("segs_per_speaker") = 3, py::arg("noise_sigma") = 0.1,
      py::arg("seed") = 1, py::arg("c_audio") = 16, py::arg("c_face") = 16,
      py::arg("h") = 4, py::arg("w") = 4);
  m.def(
      "split_corpus",
      [](const SyntheticCorpus& corpus, int n_train, int n_val, int n_test) {
        auto parts = split_corpus(corpus, n_train, n_val, n_test);
        return std::make_tuple(parts[0], parts[1], parts[2]);
      },
      py::arg("corpus"), py::arg("n_train"), py::arg("n_val"),
      py::arg("n_test"));
  m.def("save_corpus", &save_corpus, py::arg("corpus"), py::arg("dir"));
  m.def("load_corpus", &load_corpus, py::arg("dir"));

  py::class_<TrainResult>(m, "TrainResult")
      .def_readonly("model", &TrainResult::model)
      .def_readonly("threshold", &TrainResult::threshold)
      .def_readonly("training_log", &TrainResult::training_log);
  m.def("train", &train, py::arg("corpus_train"), py::arg("corpus_val"),
        py::arg("config"), py::call_guard<py::gil_scoped_release>());

  py::class_<DiarizeOptions>(m, "DiarizeOptions")
      .def(py::init([](double threshold, Linkage linkage, double alpha,
                       double missing_rate, std::uint64_t seed) {
             return DiarizeOptions{threshold, linkage, alpha, missing_rate,
                                   seed};
           }),
           py::arg("threshold") = 0.5, py::arg("linkage") = Linkage::kAverage,
           py::arg("alpha") = 1.0, py::arg("missing_rate") = 0.0,
           py::arg("seed") = 1)
      .def_readwrite("threshold", &DiarizeOptions::threshold)
      .def_readwrite("linkage", &DiarizeOptions::linkage)
      .def_readwrite("alpha", &DiarizeOptions::alpha)
      .def_readwrite("missing_rate", &DiarizeOptions::missing_rate)
      .def_readwrite("seed", &DiarizeOptions::seed);

  m.def(
      "diarize_corpus",
      [](const SyntheticCorpus& corpus, const RelationModel& model,
         const DiarizeOptions& opts, const Config& cfg) {
        SyntheticExtractor extractor(corpus);
        std::vector<RttmRecord> records;
        for (const CorpusVideo& video : corpus.videos) {
          const Diarization hyp =
              diarize_video(video, extractor, model, opts, cfg);
          const std::vector<RttmRecord> part = to_records(hyp);
          records.insert(records.end(), part.begin(), part.end());
        }
        return records;
      },
      py::arg("corpus"), py::arg("model"), py::arg("options"),
      py::arg("config"), py::call_guard<py::gil_scoped_release>());

  py::class_<CorpusEval>(m, "CorpusEval")
      .def_readonly("per_file", &CorpusEval::per_file)
      .def_readonly("total", &CorpusEval::total);
  m.def("evaluate_corpus", &evaluate_corpus, py::arg("corpus"),
        py::arg("model"), py::arg("options"), py::arg("config"),
        py::call_guard<py::gil_scoped_release>());

  py::class_<SweepRow>(m, "SweepRow")
      .def_readonly("missing_rate", &SweepRow::missing_rate)
      .def_readonly("missed_pct", &SweepRow::missed_pct)
      .def_readonly("false_alarm_pct", &SweepRow::false_alarm_pct)
      .def_readonly("confusion_pct", &SweepRow::confusion_pct)
      .def_readonly("der_pct", &SweepRow::der_pct);
  py::class_<SweepResult>(m, "SweepResult")
      .def_readonly("rows", &SweepResult::rows)
      .def_readonly("average", &SweepResult::average);
  m.def("run_sweep", &run_sweep, py::arg("corpus"), py::arg("model"),
        py::arg("options"), py::arg("config"),
        py::call_guard<py::gil_scoped_release>());
}
