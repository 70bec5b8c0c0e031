// The QRL computation model: displacement decoding, Pauli frame tracking,
// teleportation gadget execution, magic (T) injection with conditional-P
// feedforward, angle calibration, circuit compilation, and schedule runs.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "qrlsim/dv.hpp"
#include "qrlsim/fmps.hpp"
#include "qrlsim/qrl_algebra.hpp"

namespace qrlsim {

// ---------------------------------------------------------------------------
// Displacement decoding

// mu_{a,b} = i (m_a e^{i theta_b} + m_b e^{i theta_a}) / sin(theta_a - theta_b)
// s = (sqrt2 Re mu, sqrt2 Im mu)
inline std::pair<double, double> decode_displacement(double m_a, double m_b, double theta_a,
                                                     double theta_b) {
  const double den = std::sin(theta_a - theta_b);
  if (std::abs(den) < 1e-9) throw std::invalid_argument("decode_displacement: undecodable gadget");
  const cplx mu = cplx(0, 1) *
                  (m_a * std::polar(1.0, theta_b) + m_b * std::polar(1.0, theta_a)) / den;
  return {std::sqrt(2.0) * std::real(mu), std::sqrt(2.0) * std::imag(mu)};
}

// n(x) = [x / sqrt(pi)] mod 2
inline int syndrome_bits(double s) {
  if (!std::isfinite(s)) throw std::invalid_argument("syndrome_bits: non-finite");
  const long r = std::lround(s / kSqrtPi);
  return static_cast<int>(((r % 2) + 2) % 2);
}

struct Syndrome {
  int x_bit = 0;
  int z_bit = 0;
  double s1 = 0.0, s2 = 0.0;  // raw displacements
};

inline Syndrome decode_syndrome(double m_a, double m_b, double theta_a, double theta_b) {
  auto [s1, s2] = decode_displacement(m_a, m_b, theta_a, theta_b);
  return Syndrome{syndrome_bits(s1), syndrome_bits(s2), s1, s2};
}

// ---------------------------------------------------------------------------
// Pauli frame

struct PauliFrame {
  std::uint32_t x_bits = 0;
  std::uint32_t z_bits = 0;

  int x(int q) const { return (x_bits >> q) & 1; }
  int z(int q) const { return (z_bits >> q) & 1; }
  void flip_x(int q) { x_bits ^= (1u << q); }
  void flip_z(int q) { z_bits ^= (1u << q); }
  bool identity() const { return x_bits == 0 && z_bits == 0; }
};

// Conjugate the frame through a Clifford (phases untracked); Paulis fold in.
inline PauliFrame frame_update_clifford(PauliFrame f, GateLabel g, int w0, int w1 = -1) {
  auto need2 = [&] {
    if (w1 < 0) throw std::invalid_argument("frame_update_clifford: two wires required");
  };
  switch (g) {
    case GateLabel::I: break;
    case GateLabel::H: {
      const int x = f.x(w0), z = f.z(w0);
      if (x != z) {
        f.flip_x(w0);
        f.flip_z(w0);
      }
      break;
    }
    case GateLabel::P:
    case GateLabel::Pdg:
      if (f.x(w0)) f.flip_z(w0);
      break;
    case GateLabel::CZ:
      need2();
      if (f.x(w0)) f.flip_z(w1);
      if (f.x(w1)) f.flip_z(w0);
      break;
    case GateLabel::SWAP: {
      need2();
      const int x0 = f.x(w0), z0 = f.z(w0), x1 = f.x(w1), z1 = f.z(w1);
      if (x0 != x1) {
        f.flip_x(w0);
        f.flip_x(w1);
      }
      if (z0 != z1) {
        f.flip_z(w0);
        f.flip_z(w1);
      }
      break;
    }
    case GateLabel::CX:  // control w0, target w1
      need2();
      if (f.x(w0)) f.flip_x(w1);
      if (f.z(w1)) f.flip_z(w0);
      break;
    case GateLabel::X: f.flip_x(w0); break;
    case GateLabel::Z: f.flip_z(w0); break;
    case GateLabel::Y:
      f.flip_x(w0);
      f.flip_z(w0);
      break;
    default: throw std::invalid_argument("frame_update_clifford: unsupported gate");
  }
  return f;
}

// T_i^{dag if X_i in P} P = P T_i: report which physical variant acts as T.
inline GateLabel resolve_t_variant(const PauliFrame& f, int q) {
  return f.x(q) ? GateLabel::Tdg : GateLabel::T;
}

// ---------------------------------------------------------------------------
// Angle programs

struct AngleProgram {
  double theta_a = 0.0;
  double theta_b = kPi / 2.0;
  BsConvention conv = BsConvention::plus;
  int pad_x = 0, pad_z = 0;  // deterministic Pauli of the program
};

struct TwoModeProgram {
  double theta_a1 = 0.0, theta_b1 = kPi / 2.0;  // wire 1 (input, pair-partner)
  double theta_a2 = 0.0, theta_b2 = kPi / 2.0;  // wire 2
  BsConvention conv1 = BsConvention::plus;
  BsConvention conv2 = BsConvention::plus;
  BsConvention link = BsConvention::plus;
  int pad_x1 = 0, pad_z1 = 0, pad_x2 = 0, pad_z2 = 0;
};

struct AngleTable {
  int version = 1;
  double calibration_db = 14.0;
  std::map<std::string, AngleProgram> single;  // I, H, P, Pdg
  std::map<std::string, TwoModeProgram> two;   // e.g. CZ, SWAP, CXd, CXu, CZ+P2, ...

  const AngleProgram& single_at(const std::string& k) const {
    auto it = single.find(k);
    if (it == single.end()) throw std::runtime_error("angle table: missing single " + k);
    return it->second;
  }
  const TwoModeProgram& two_at(const std::string& k) const {
    auto it = two.find(k);
    if (it == two.end()) throw std::runtime_error("angle table: missing two-mode " + k);
    return it->second;
  }
};

// versioned key-value text format, 12 significant digits
inline std::string angle_table_to_text(const AngleTable& t) {
  std::ostringstream os;
  os.precision(12);
  os << "# qrlsim angle table\n";
  os << "version " << t.version << "\n";
  os << "calibration_db " << t.calibration_db << "\n";
  for (const auto& [k, p] : t.single) {
    os << "single " << k << " " << p.theta_a << " " << p.theta_b << " "
       << (p.conv == BsConvention::plus ? "+" : "-") << " " << p.pad_x << " " << p.pad_z << "\n";
  }
  for (const auto& [k, p] : t.two) {
    os << "two " << k << " " << p.theta_a1 << " " << p.theta_b1 << " " << p.theta_a2 << " "
       << p.theta_b2 << " " << (p.conv1 == BsConvention::plus ? "+" : "-") << " "
       << (p.conv2 == BsConvention::plus ? "+" : "-") << " "
       << (p.link == BsConvention::plus ? "+" : "-") << " " << p.pad_x1 << " " << p.pad_z1 << " "
       << p.pad_x2 << " " << p.pad_z2 << "\n";
  }
  return os.str();
}

inline AngleTable angle_table_from_text(const std::string& text) {
  AngleTable t;
  std::istringstream is(text);
  std::string line;
  auto conv_of = [](const std::string& s) {
    return s == "+" ? BsConvention::plus : BsConvention::minus;
  };
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string kind;
    ls >> kind;
    if (kind == "version") {
      ls >> t.version;
    } else if (kind == "calibration_db") {
      ls >> t.calibration_db;
    } else if (kind == "single") {
      std::string key, c;
      AngleProgram p;
      ls >> key >> p.theta_a >> p.theta_b >> c >> p.pad_x >> p.pad_z;
      p.conv = conv_of(c);
      t.single[key] = p;
    } else if (kind == "two") {
      std::string key, c1, c2, cl;
      TwoModeProgram p;
      ls >> key >> p.theta_a1 >> p.theta_b1 >> p.theta_a2 >> p.theta_b2 >> c1 >> c2 >> cl >>
          p.pad_x1 >> p.pad_z1 >> p.pad_x2 >> p.pad_z2;
      p.conv1 = conv_of(c1);
      p.conv2 = conv_of(c2);
      p.link = conv_of(cl);
      t.two[key] = p;
    } else {
      throw std::runtime_error("angle table: bad line: " + line);
    }
    if (!ls && !ls.eof()) throw std::runtime_error("angle table: parse error: " + line);
  }
  return t;
}

// ---------------------------------------------------------------------------
// Gadget execution

struct GadgetOutcome {
  Syndrome syn;
  double m_a = 0.0, m_b = 0.0;
};

// Knill teleportation gadget on one wire: inject the pair behind the wire,
// beam-split wire against the pair's first mode, measure both at the program
// angles, decode. Mode count is conserved and no SVD is performed.
inline GadgetOutcome execute_single_gadget(FmpsState& s, int wire, const AngleProgram& prog,
                                           const BellPairMps& pair) {
  if (wire < 0 || wire >= s.mode_count()) throw std::out_of_range("execute_single_gadget: wire");
  insert_two_mode(s, wire + 1, pair);
  auto [ra, rb] = bs_then_measure_both(s, wire, prog.conv, prog.theta_a, prog.theta_b);
  GadgetOutcome out;
  out.m_a = ra.m;
  out.m_b = rb.m;
  out.syn = decode_syndrome(ra.m, rb.m, prog.theta_a, prog.theta_b);
  return out;
}

// Two-mode gadget on adjacent wires (w, w+1): two pairs, the wire beam
// splitters, input measurements, then the linking beam splitter between the
// two pair partners (adjacent once the inputs are measured) and their
// measurements. Each wire decodes independently from its two outcomes.
inline std::pair<GadgetOutcome, GadgetOutcome> execute_two_mode_gadget(
    FmpsState& s, int w, const TwoModeProgram& prog, const BellPairMps& pair1,
    const BellPairMps& pair2) {
  if (w < 0 || w + 1 >= s.mode_count()) {
    throw std::out_of_range("execute_two_mode_gadget: needs adjacent wires");
  }
  insert_two_mode(s, w, reversed(pair1));  // [a2, a1, psi1, psi2, ...]
  insert_two_mode(s, w + 4, pair2);        // [a2, a1, psi1, psi2, b1, b2, ...]

  // wire beam splitters + input measurements (middle modes first)
  auto r_a1 = bs_then_measure_one(s, w + 1, prog.conv1, 1, prog.theta_a1);  // psi1
  auto r_a2 = bs_then_measure_one(s, w + 2, prog.conv2, 0, prog.theta_a2);  // psi2
  // linking beam splitter between the pair partners, then measure both
  auto [r_b1, r_b2] = bs_then_measure_both(s, w + 1, prog.link, prog.theta_b1, prog.theta_b2);

  GadgetOutcome o1, o2;
  o1.m_a = r_a1.m;
  o1.m_b = r_b1.m;
  o1.syn = decode_syndrome(r_a1.m, r_b1.m, prog.theta_a1, prog.theta_b1);
  o2.m_a = r_a2.m;
  o2.m_b = r_b2.m;
  o2.syn = decode_syndrome(r_a2.m, r_b2.m, prog.theta_a2, prog.theta_b2);
  return {o1, o2};
}

// ---------------------------------------------------------------------------
// T-slot transition table
//
// The magic gadget's raw output is T * E * P^w * F |psi>, with E the decoded
// syndrome Pauli (pads folded in), P^w the slot program, F the accumulated
// frame. The runtime rewrites this as F' * P^{w'} * G |psi> with G the
// compiled gate; the residual P^{w'} is the conditional-P feedforward,
// consumed by the wire's next gadget. The rewrite table is solved once from
// exact 2x2 algebra rather than hand-derived identities.

namespace detail {

struct TSlotKey {
  int fx, fz, w, g, ex, ez;
  bool operator<(const TSlotKey& o) const {
    return std::tie(fx, fz, w, g, ex, ez) < std::tie(o.fx, o.fz, o.w, o.g, o.ex, o.ez);
  }
};
struct TSlotOut {
  int fx, fz, w;
};

inline Eigen::Matrix2cd pauli_mat(int x, int z) {
  Eigen::Matrix2cd m = Eigen::Matrix2cd::Identity();
  if (z) m = gate_matrix_1q(GateLabel::Z) * m;
  if (x) m = gate_matrix_1q(GateLabel::X) * m;
  return m;
}

inline bool proportional(const Eigen::Matrix2cd& a, const Eigen::Matrix2cd& b) {
  cplx ratio(0, 0);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      if (std::abs(b(i, j)) < 1e-12) {
        if (std::abs(a(i, j)) > 1e-12) return false;
        continue;
      }
      const cplx r = a(i, j) / b(i, j);
      if (std::abs(ratio) < 1e-12) ratio = r;
      else if (std::abs(r - ratio) > 1e-9) return false;
    }
  return std::abs(ratio) > 1e-12;
}

inline const std::map<TSlotKey, TSlotOut>& t_slot_table() {
  static const std::map<TSlotKey, TSlotOut> table = [] {
    std::map<TSlotKey, TSlotOut> tab;
    const auto tm = gate_matrix_1q(GateLabel::T);
    const auto tdg = gate_matrix_1q(GateLabel::Tdg);
    const auto pm = gate_matrix_1q(GateLabel::P);
    for (int fx = 0; fx < 2; ++fx)
      for (int fz = 0; fz < 2; ++fz)
        for (int w = 0; w < 2; ++w)
          for (int g = 0; g < 2; ++g)
            for (int ex = 0; ex < 2; ++ex)
              for (int ez = 0; ez < 2; ++ez) {
                Eigen::Matrix2cd lhs = tm * pauli_mat(ex, ez) *
                                       (w ? pm : Eigen::Matrix2cd::Identity()) *
                                       pauli_mat(fx, fz);
                bool found = false;
                for (int nfx = 0; nfx < 2 && !found; ++nfx)
                  for (int nfz = 0; nfz < 2 && !found; ++nfz)
                    for (int nw = 0; nw < 2 && !found; ++nw) {
                      Eigen::Matrix2cd rhs = pauli_mat(nfx, nfz) *
                                             (nw ? pm : Eigen::Matrix2cd::Identity()) *
                                             (g ? tdg : tm);
                      if (proportional(lhs, rhs)) {
                        tab[TSlotKey{fx, fz, w, g, ex, ez}] = TSlotOut{nfx, nfz, nw};
                        found = true;
                      }
                    }
                if (!found) throw std::logic_error("t_slot_table: unsat case");
              }
    return tab;
  }();
  return table;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Schedules

enum class SlotKind { Idle, Single, TwoA, TwoB, TSlot };

struct Slot {
  SlotKind kind = SlotKind::Idle;
  GateLabel gate = GateLabel::I;
  int two_control = 0;   // for CX on a TwoA slot: 0 = this wire is control
  bool has_cond = false;  // absorbs the wire's pending conditional P
};

struct ScheduleLayer {
  std::vector<Slot> slots;
  std::vector<Gate> pre_frame;  // Pauli frame ops applied at layer start
};

struct QrlSchedule {
  int width = 0;
  std::vector<ScheduleLayer> layers;
  int bell_pair_count = 0;
  int magic_count = 0;
  int depth() const { return static_cast<int>(layers.size()); }
  int physical_modes() const { return 2 * bell_pair_count; }

  std::string dump() const {
    std::ostringstream os;
    os << "width " << width << " depth " << depth() << " bell_pairs " << bell_pair_count
       << " magic " << magic_count << " modes " << physical_modes() << "\n";
    for (size_t l = 0; l < layers.size(); ++l) {
      os << "L" << l << ":";
      for (const auto& g : layers[l].pre_frame) {
        os << " [" << to_string(g.label) << " q" << g.w[0] << "]";
      }
      for (int w = 0; w < width; ++w) {
        const Slot& s = layers[l].slots[w];
        os << " ";
        switch (s.kind) {
          case SlotKind::Idle: os << (s.has_cond ? "i*" : "i"); break;
          case SlotKind::Single: os << to_string(s.gate) << (s.has_cond ? "*" : ""); break;
          case SlotKind::TwoA:
            os << to_string(s.gate) << (s.gate == GateLabel::CX ? (s.two_control == 0 ? "v" : "^")
                                                                : "")
               << "A" << (s.has_cond ? "*" : "");
            break;
          case SlotKind::TwoB: os << "." << (s.has_cond ? "*" : ""); break;
          case SlotKind::TSlot: os << to_string(s.gate) << "!" << (s.has_cond ? "*" : ""); break;
        }
      }
      os << "\n";
    }
    return os.str();
  }
};

// Compile a logical gate list onto gadget layers. Paulis fold into frame
// rules, single-qubit Cliffords occupy single-mode gadgets, T/Tdg occupy
// magic slots whose conditional-P rides on the wire's next gadget (a
// dedicated identity slot is inserted when the next gate could not absorb
// it, or at the end of the circuit).
inline QrlSchedule compile(const Circuit& circuit, int width) {
  if (width < 1 || width > 16) throw std::invalid_argument("compile: width out of range");
  QrlSchedule sch;
  sch.width = width;
  std::vector<int> next_free(width, 0);
  std::vector<bool> pending(width, false);

  auto ensure = [&](int layer) {
    while (static_cast<int>(sch.layers.size()) <= layer) {
      ScheduleLayer l;
      l.slots.assign(width, Slot{});
      sch.layers.push_back(std::move(l));
    }
  };
  auto place = [&](int layer, int wire, Slot s) {
    ensure(layer);
    sch.layers[layer].slots[wire] = s;
  };
  // flush a pending conditional onto a dedicated identity slot
  auto flush_pending = [&](int w) {
    if (!pending[w]) return;
    place(next_free[w], w, Slot{SlotKind::Single, GateLabel::I, 0, true});
    next_free[w]++;
    pending[w] = false;
  };

  for (const auto& g : circuit) {
    switch (g.label) {
      case GateLabel::X:
      case GateLabel::Y:
      case GateLabel::Z: {
        const int w = g.w[0];
        if (w < 0 || w >= width) throw std::invalid_argument("compile: wire out of range");
        ensure(next_free[w]);
        sch.layers[next_free[w]].pre_frame.push_back(g);
        break;
      }
      case GateLabel::I:
        break;  // logical no-op; idles are materialized at finalize
      case GateLabel::H:
      case GateLabel::P:
      case GateLabel::Pdg: {
        const int w = g.w[0];
        if (w < 0 || w >= width) throw std::invalid_argument("compile: wire out of range");
        flush_pending(w);  // H/P/Pdg gadgets cannot also carry a conditional P
        place(next_free[w], w, Slot{SlotKind::Single, g.label, 0, false});
        next_free[w]++;
        break;
      }
      case GateLabel::T:
      case GateLabel::Tdg: {
        const int w = g.w[0];
        if (w < 0 || w >= width) throw std::invalid_argument("compile: wire out of range");
        const bool cond = pending[w];
        pending[w] = false;  // absorbed by this magic gadget's program
        place(next_free[w], w, Slot{SlotKind::TSlot, g.label, 0, cond});
        next_free[w]++;
        pending[w] = true;
        break;
      }
      case GateLabel::CZ:
      case GateLabel::SWAP:
      case GateLabel::CX: {
        int a = g.w[0], b = g.w[1];
        if (a > b) {
          if (g.label == GateLabel::CX) {
            std::swap(a, b);  // control stays w[0]; direction tracked below
          } else {
            std::swap(a, b);
          }
        }
        if (a < 0 || b >= width || b - a != 1) {
          throw std::invalid_argument("compile: routing required (two-qubit gates on adjacent wires)");
        }
        const int ctrl_is_low = (g.label == GateLabel::CX && g.w[0] == a) ? 0 : 1;
        const int layer = std::max(next_free[a], next_free[b]);
        // a pending conditional can ride on this gadget's wire program, but
        // idle slots before it are cheaper hosts when the wire waits anyway
        for (int w : {a, b}) {
          if (pending[w] && next_free[w] < layer) flush_pending(w);
        }
        place(layer, a, Slot{SlotKind::TwoA, g.label, ctrl_is_low, pending[a]});
        place(layer, b, Slot{SlotKind::TwoB, g.label, ctrl_is_low, pending[b]});
        pending[a] = pending[b] = false;
        next_free[a] = next_free[b] = layer + 1;
        break;
      }
      default:
        throw std::invalid_argument("compile: gate not schedulable: " +
                                    std::string(to_string(g.label)));
    }
  }
  for (int w = 0; w < width; ++w) flush_pending(w);

  sch.bell_pair_count = 0;
  sch.magic_count = 0;
  for (auto& layer : sch.layers) {
    for (int w = 0; w < width; ++w) {
      const Slot& s = layer.slots[w];
      if (s.kind == SlotKind::TSlot) sch.magic_count++;
      if (s.kind != SlotKind::TwoB) sch.bell_pair_count++;  // TwoB counted via its own pair
      if (s.kind == SlotKind::TwoB) sch.bell_pair_count++;
    }
  }
  return sch;
}

// ---------------------------------------------------------------------------
// Schedule execution

struct SyndromeRecord {
  int layer = 0;
  int wire = 0;
  Syndrome syn;
  double m_a = 0.0, m_b = 0.0;
};

struct RunResult {
  PauliFrame frame;
  std::vector<SyndromeRecord> log;
  double truncation_weight = 0.0;
};

struct QrlRuntime {
  GridSpec grid;
  double eps = 0.0;
  AngleTable table;
  BellPairMps pair_std;
  BellPairMps pair_magic;

  static QrlRuntime make(const GridSpec& g, const DampingParam& d, AngleTable table) {
    QrlRuntime rt;
    rt.grid = g;
    rt.eps = d.eps;
    rt.table = std::move(table);
    rt.pair_std = bell_pair(d, false, g);
    rt.pair_magic = bell_pair(d, true, g);
    return rt;
  }
};

namespace detail {

inline std::string two_key(GateLabel g, int ctrl_low, int p1, int p2) {
  std::string k;
  if (g == GateLabel::CX) k = (ctrl_low == 0) ? "CXd" : "CXu";
  else k = to_string(g);
  if (p1 && p2) k += "+P1P2";
  else if (p1) k += "+P1";
  else if (p2) k += "+P2";
  return k;
}

}  // namespace detail

// Execute a compiled schedule on an N-mode input state. Every wire consumes
// one Bell pair per layer (idle wires teleport through identity gadgets).
inline RunResult run_schedule(const QrlSchedule& sch, FmpsState& state, const QrlRuntime& rt) {
  if (state.mode_count() != sch.width) throw std::invalid_argument("run_schedule: width mismatch");
  RunResult res;
  std::vector<int> pending_p(sch.width, 0);

  for (int li = 0; li < sch.depth(); ++li) {
    const auto& layer = sch.layers[li];
    for (const auto& g : layer.pre_frame) {
      res.frame = frame_update_clifford(res.frame, g.label, g.w[0]);
    }
    for (int w = 0; w < sch.width; ++w) {
      const Slot& slot = layer.slots[w];
      switch (slot.kind) {
        case SlotKind::TwoB:
          break;  // handled with its TwoA partner
        case SlotKind::Idle:
        case SlotKind::Single: {
          GateLabel phys = slot.gate;
          if (slot.kind == SlotKind::Idle) phys = GateLabel::I;
          if (pending_p[w]) {
            if (phys != GateLabel::I) {
              throw std::logic_error("run_schedule: conditional P on a non-identity single");
            }
            phys = GateLabel::P;
            pending_p[w] = 0;
          }
          const AngleProgram& prog = rt.table.single_at(to_string(phys));
          auto out = execute_single_gadget(state, w, prog, rt.pair_std);
          res.frame = frame_update_clifford(res.frame, phys, w);
          if (out.syn.x_bit ^ prog.pad_x) res.frame.flip_x(w);
          if (out.syn.z_bit ^ prog.pad_z) res.frame.flip_z(w);
          res.log.push_back(SyndromeRecord{li, w, out.syn, out.m_a, out.m_b});
          break;
        }
        case SlotKind::TwoA: {
          const int w2 = w + 1;
          const int p1 = pending_p[w], p2 = pending_p[w2];
          pending_p[w] = pending_p[w2] = 0;
          const auto& prog = rt.table.two_at(detail::two_key(slot.gate, slot.two_control, p1, p2));
          auto [o1, o2] = execute_two_mode_gadget(state, w, prog, rt.pair_std, rt.pair_std);
          if (p1) res.frame = frame_update_clifford(res.frame, GateLabel::P, w);
          if (p2) res.frame = frame_update_clifford(res.frame, GateLabel::P, w2);
          if (slot.gate == GateLabel::CX) {
            const int c = (slot.two_control == 0) ? w : w2;
            const int t = (slot.two_control == 0) ? w2 : w;
            res.frame = frame_update_clifford(res.frame, GateLabel::CX, c, t);
          } else {
            res.frame = frame_update_clifford(res.frame, slot.gate, w, w2);
          }
          if (o1.syn.x_bit ^ prog.pad_x1) res.frame.flip_x(w);
          if (o1.syn.z_bit ^ prog.pad_z1) res.frame.flip_z(w);
          if (o2.syn.x_bit ^ prog.pad_x2) res.frame.flip_x(w2);
          if (o2.syn.z_bit ^ prog.pad_z2) res.frame.flip_z(w2);
          res.log.push_back(SyndromeRecord{li, w, o1.syn, o1.m_a, o1.m_b});
          res.log.push_back(SyndromeRecord{li, w2, o2.syn, o2.m_a, o2.m_b});
          break;
        }
        case SlotKind::TSlot: {
          const int w_used = pending_p[w];
          pending_p[w] = 0;
          const GateLabel phys = w_used ? GateLabel::P : GateLabel::I;
          const AngleProgram& prog = rt.table.single_at(to_string(phys));
          auto out = execute_single_gadget(state, w, prog, rt.pair_magic);
          const int ex = out.syn.x_bit ^ prog.pad_x;
          const int ez = out.syn.z_bit ^ prog.pad_z;
          const int gidx = (slot.gate == GateLabel::Tdg) ? 1 : 0;
          const auto& rule = detail::t_slot_table().at(
              detail::TSlotKey{res.frame.x(w), res.frame.z(w), w_used, gidx, ex, ez});
          if (rule.fx != res.frame.x(w)) res.frame.flip_x(w);
          if (rule.fz != res.frame.z(w)) res.frame.flip_z(w);
          pending_p[w] = rule.w;
          res.log.push_back(SyndromeRecord{li, w, out.syn, out.m_a, out.m_b});
          break;
        }
      }
    }
  }
  for (int w = 0; w < sch.width; ++w) {
    if (pending_p[w]) throw std::logic_error("run_schedule: unconsumed conditional P");
  }
  res.truncation_weight = state.truncation_weight;
  return res;
}

}  // namespace qrlsim
