#include "bcfp/smiles.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdlib>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

namespace bcfp {

namespace {

constexpr std::array<std::string_view, 119> kSymbols = {
    "",   "H",  "He", "Li", "Be", "B",  "C",  "N",  "O",  "F",  "Ne", "Na", "Mg", "Al", "Si",
    "P",  "S",  "Cl", "Ar", "K",  "Ca", "Sc", "Ti", "V",  "Cr", "Mn", "Fe", "Co", "Ni", "Cu",
    "Zn", "Ga", "Ge", "As", "Se", "Br", "Kr", "Rb", "Sr", "Y",  "Zr", "Nb", "Mo", "Tc", "Ru",
    "Rh", "Pd", "Ag", "Cd", "In", "Sn", "Sb", "Te", "I",  "Xe", "Cs", "Ba", "La", "Ce", "Pr",
    "Nd", "Pm", "Sm", "Eu", "Gd", "Tb", "Dy", "Ho", "Er", "Tm", "Yb", "Lu", "Hf", "Ta", "W",
    "Re", "Os", "Ir", "Pt", "Au", "Hg", "Tl", "Pb", "Bi", "Po", "At", "Rn", "Fr", "Ra", "Ac",
    "Th", "Pa", "U",  "Np", "Pu", "Am", "Cm", "Bk", "Cf", "Es", "Fm", "Md", "No", "Lr", "Rf",
    "Db", "Sg", "Bh", "Hs", "Mt", "Ds", "Rg", "Cn", "Nh", "Fl", "Mc", "Lv", "Ts", "Og"};

// Default valences for the organic subset, ascending.
std::span<const int> default_valences(int element) {
    static constexpr std::array<int, 1> kB{3}, kC{4}, kN{3}, kO{2}, kHal{1};
    static constexpr std::array<int, 2> kP{3, 5};
    static constexpr std::array<int, 3> kS{2, 4, 6};
    switch (element) {
        case 5: return kB;
        case 6: return kC;
        case 7: return kN;
        case 8: return kO;
        case 15: return kP;
        case 16: return kS;
        case 9:
        case 17:
        case 35:
        case 53: return kHal;
        default: return {};
    }
}

struct RawBond {
    int a;
    int b;
    BondOrder order;
    bool implicit_aromatic;  // no symbol written, both ends aromatic
    std::size_t pos;
};

struct RingOpening {
    int atom;
    char symbol;  // 0 when none written
    std::size_t pos;
};

class Parser {
public:
    Parser(std::string_view text, std::size_t offset) : text_(text), offset_(offset) {}

    Molecule run(const ParseOptions& options, std::string source);

private:
    [[noreturn]] void fail(SmilesErrorKind kind, const std::string& msg) const {
        throw SmilesError(kind, offset_ + i_, msg);
    }
    [[noreturn]] void fail_at(SmilesErrorKind kind, std::size_t pos, const std::string& msg) const {
        throw SmilesError(kind, offset_ + pos, msg);
    }

    bool at_end() const { return i_ >= text_.size(); }
    char peek(std::size_t ahead = 0) const {
        return i_ + ahead < text_.size() ? text_[i_ + ahead] : '\0';
    }

    void add_atom(Atom atom);
    void parse_organic();
    void parse_bracket();
    void parse_ring_closure();
    void add_bond(int a, int b, char symbol, std::size_t pos);
    int read_number();

    std::string_view text_;
    std::size_t offset_;
    std::size_t i_ = 0;

    std::vector<Atom> atoms_;
    std::vector<RawBond> bonds_;
    std::vector<std::size_t> atom_pos_;
    std::map<int, RingOpening> rings_;
    std::vector<int> branches_;
    int prev_ = -1;
    char pending_ = 0;
    std::size_t pending_pos_ = 0;
};

int Parser::read_number() {
    int value = 0;
    while (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) {
        value = value * 10 + (peek() - '0');
        if (value > 1000000) {
            fail(SmilesErrorKind::UnknownSymbol, "number too large");
        }
        ++i_;
    }
    return value;
}

void Parser::add_bond(int a, int b, char symbol, std::size_t pos) {
    if (a == b) {
        fail_at(SmilesErrorKind::InvalidBond, pos, "ring closure onto the same atom");
    }
    for (const auto& rb : bonds_) {
        if ((rb.a == a && rb.b == b) || (rb.a == b && rb.b == a)) {
            fail_at(SmilesErrorKind::InvalidBond, pos, "second bond between the same atoms");
        }
    }
    const bool both_aromatic = atoms_[static_cast<std::size_t>(a)].aromatic &&
                               atoms_[static_cast<std::size_t>(b)].aromatic;
    RawBond bond{a, b, BondOrder::Single, false, pos};
    switch (symbol) {
        case 0:
            if (both_aromatic) {
                bond.order = BondOrder::Aromatic;
                bond.implicit_aromatic = true;
            }
            break;
        case '-':
        case '/':
        case '\\': bond.order = BondOrder::Single; break;
        case '=': bond.order = BondOrder::Double; break;
        case '#': bond.order = BondOrder::Triple; break;
        case ':':
            if (!both_aromatic) {
                fail_at(SmilesErrorKind::InvalidAromatic, pos, "aromatic bond between non-aromatic atoms");
            }
            bond.order = BondOrder::Aromatic;
            break;
        default: fail_at(SmilesErrorKind::UnknownSymbol, pos, "unsupported bond symbol");
    }
    bonds_.push_back(bond);
}

void Parser::add_atom(Atom atom) {
    const int idx = static_cast<int>(atoms_.size());
    atoms_.push_back(atom);
    atom_pos_.push_back(i_);
    if (prev_ >= 0) {
        add_bond(prev_, idx, pending_, pending_ ? pending_pos_ : i_);
    } else if (pending_) {
        fail_at(SmilesErrorKind::InvalidBond, pending_pos_, "bond symbol without a preceding atom");
    }
    pending_ = 0;
    prev_ = idx;
}

void Parser::parse_organic() {
    const std::size_t start = i_;
    Atom atom;
    const char c = peek();
    if (c == 'C' && peek(1) == 'l') {
        atom.element = 17;
        i_ += 2;
    } else if (c == 'B' && peek(1) == 'r') {
        atom.element = 35;
        i_ += 2;
    } else {
        switch (c) {
            case 'B': atom.element = 5; break;
            case 'C': atom.element = 6; break;
            case 'N': atom.element = 7; break;
            case 'O': atom.element = 8; break;
            case 'P': atom.element = 15; break;
            case 'S': atom.element = 16; break;
            case 'F': atom.element = 9; break;
            case 'I': atom.element = 53; break;
            case 'b': atom.element = 5; atom.aromatic = true; break;
            case 'c': atom.element = 6; atom.aromatic = true; break;
            case 'n': atom.element = 7; atom.aromatic = true; break;
            case 'o': atom.element = 8; atom.aromatic = true; break;
            case 'p': atom.element = 15; atom.aromatic = true; break;
            case 's': atom.element = 16; atom.aromatic = true; break;
            default: fail(SmilesErrorKind::UnknownSymbol, std::string("unexpected character '") + c + "'");
        }
        ++i_;
    }
    const std::size_t end = i_;
    i_ = start;
    add_atom(atom);
    i_ = end;
}

void Parser::parse_bracket() {
    const std::size_t open = i_;
    ++i_;  // '['
    Atom atom;
    atom.bracket = true;
    if (std::isdigit(static_cast<unsigned char>(peek()))) {
        atom.isotope = read_number();
    }

    // Element symbol: aromatic lowercase forms first, then two-letter, then one-letter.
    static constexpr std::array<std::pair<std::string_view, int>, 9> kAromatic = {{
        {"se", 34}, {"as", 33}, {"te", 52}, {"b", 5}, {"c", 6}, {"n", 7}, {"o", 8}, {"p", 15}, {"s", 16},
    }};
    const std::string_view rest = text_.substr(i_);
    bool matched = false;
    for (const auto& [sym, z] : kAromatic) {
        if (rest.starts_with(sym)) {
            atom.element = z;
            atom.aromatic = true;
            i_ += sym.size();
            matched = true;
            break;
        }
    }
    if (!matched) {
        if (rest.size() >= 2 && std::islower(static_cast<unsigned char>(rest[1]))) {
            if (int z = element_from_symbol(rest.substr(0, 2)); z > 0) {
                atom.element = z;
                i_ += 2;
                matched = true;
            }
        }
        if (!matched && !rest.empty()) {
            if (int z = element_from_symbol(rest.substr(0, 1)); z > 0) {
                atom.element = z;
                i_ += 1;
                matched = true;
            }
        }
    }
    if (!matched) {
        fail(SmilesErrorKind::UnknownSymbol, "unknown element in bracket atom");
    }

    // Chirality, parsed and dropped.
    if (peek() == '@') {
        ++i_;
        if (peek() == '@') {
            ++i_;
        } else {
            const std::string_view tag = text_.substr(i_, 2);
            if (tag == "TH" || tag == "AL" || tag == "SP" || tag == "TB" || tag == "OH") {
                i_ += 2;
                read_number();
            }
        }
    }
    if (peek() == 'H') {
        ++i_;
        atom.explicit_h = std::isdigit(static_cast<unsigned char>(peek())) ? read_number() : 1;
    }
    if (peek() == '+' || peek() == '-') {
        const char sign = peek();
        const int unit = sign == '+' ? 1 : -1;
        ++i_;
        if (std::isdigit(static_cast<unsigned char>(peek()))) {
            atom.formal_charge = unit * read_number();
        } else {
            int n = 1;
            while (peek() == sign) {
                ++n;
                ++i_;
            }
            atom.formal_charge = unit * n;
        }
    }
    if (peek() == ':') {
        ++i_;
        if (!std::isdigit(static_cast<unsigned char>(peek()))) {
            fail(SmilesErrorKind::UnknownSymbol, "atom class without a number");
        }
        read_number();
    }
    if (peek() != ']') {
        fail(SmilesErrorKind::UnknownSymbol, "malformed bracket atom");
    }
    ++i_;
    const std::size_t end = i_;
    i_ = open;
    add_atom(atom);
    i_ = end;
}

void Parser::parse_ring_closure() {
    const std::size_t pos = i_;
    int number = 0;
    if (peek() == '%') {
        ++i_;
        if (!std::isdigit(static_cast<unsigned char>(peek())) ||
            !std::isdigit(static_cast<unsigned char>(peek(1)))) {
            fail(SmilesErrorKind::UnknownSymbol, "'%' must be followed by two digits");
        }
        number = (peek() - '0') * 10 + (peek(1) - '0');
        i_ += 2;
    } else {
        number = peek() - '0';
        ++i_;
    }
    if (prev_ < 0) {
        fail_at(SmilesErrorKind::InvalidBond, pos, "ring closure without a preceding atom");
    }
    auto it = rings_.find(number);
    if (it == rings_.end()) {
        rings_.emplace(number, RingOpening{prev_, pending_, pos});
    } else {
        const RingOpening opening = it->second;
        rings_.erase(it);
        char symbol = opening.symbol;
        if (pending_) {
            if (symbol && symbol != pending_ && !(std::string_view("-/\\").find(symbol) != std::string_view::npos &&
                                                  std::string_view("-/\\").find(pending_) != std::string_view::npos)) {
                fail_at(SmilesErrorKind::InvalidBond, pos, "conflicting ring-closure bond symbols");
            }
            symbol = pending_;
        }
        add_bond(opening.atom, prev_, symbol, pos);
    }
    pending_ = 0;
}

Molecule Parser::run(const ParseOptions& options, std::string source) {
    while (!at_end()) {
        const char c = peek();
        if (c == '[') {
            parse_bracket();
        } else if (std::isalpha(static_cast<unsigned char>(c))) {
            parse_organic();
        } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '%') {
            parse_ring_closure();
        } else if (c == '(') {
            if (prev_ < 0) {
                fail(SmilesErrorKind::UnbalancedParenthesis, "branch without a preceding atom");
            }
            branches_.push_back(prev_);
            ++i_;
        } else if (c == ')') {
            if (branches_.empty()) {
                fail(SmilesErrorKind::UnbalancedParenthesis, "')' without matching '('");
            }
            if (pending_) {
                fail(SmilesErrorKind::InvalidBond, "bond symbol at end of branch");
            }
            prev_ = branches_.back();
            branches_.pop_back();
            ++i_;
        } else if (c == '-' || c == '=' || c == '#' || c == ':' || c == '/' || c == '\\') {
            if (pending_) {
                fail(SmilesErrorKind::InvalidBond, "two consecutive bond symbols");
            }
            pending_ = c;
            pending_pos_ = i_;
            ++i_;
        } else if (c == '.') {
            if (pending_) {
                fail(SmilesErrorKind::InvalidBond, "bond symbol before '.'");
            }
            if (!branches_.empty()) {
                fail(SmilesErrorKind::UnbalancedParenthesis, "'.' inside a branch");
            }
            prev_ = -1;
            ++i_;
        } else {
            fail(SmilesErrorKind::UnknownSymbol, std::string("unexpected character '") + c + "'");
        }
    }
    if (!rings_.empty()) {
        fail_at(SmilesErrorKind::UnclosedRing, rings_.begin()->second.pos,
                "ring bond " + std::to_string(rings_.begin()->first) + " never closed");
    }
    if (!branches_.empty()) {
        fail(SmilesErrorKind::UnbalancedParenthesis, "unclosed branch");
    }
    if (pending_) {
        fail_at(SmilesErrorKind::InvalidBond, pending_pos_, "dangling bond symbol");
    }
    if (atoms_.empty()) {
        fail(SmilesErrorKind::Empty, "no atoms");
    }

    // Valence bookkeeping on the full graph (hydrogen atoms included).
    const std::size_t n = atoms_.size();
    std::vector<int> sigma(n, 0);      // aromatic bonds count 1
    std::vector<int> bond_sum(n, 0);   // aromatic bonds count 1, others their order
    for (const auto& rb : bonds_) {
        const int order = rb.order == BondOrder::Aromatic ? 1 : static_cast<int>(rb.order);
        for (int end : {rb.a, rb.b}) {
            sigma[static_cast<std::size_t>(end)] += 1;
            bond_sum[static_cast<std::size_t>(end)] += order;
        }
    }
    for (std::size_t a = 0; a < n; ++a) {
        Atom& atom = atoms_[a];
        const auto valences = default_valences(atom.element);
        if (valences.empty()) {
            continue;
        }
        const int max_valence = valences.back();
        if (atom.bracket) {
            const int used = bond_sum[a] + atom.explicit_h;
            if (used > max_valence + std::abs(atom.formal_charge)) {
                fail_at(SmilesErrorKind::ValenceError, atom_pos_[a],
                        "explicit valence " + std::to_string(used) + " too high for " +
                            std::string(element_symbol(atom.element)));
            }
            continue;
        }
        if (atom.aromatic) {
            if (bond_sum[a] > max_valence) {
                fail_at(SmilesErrorKind::ValenceError, atom_pos_[a], "aromatic atom valence too high");
            }
            // One valence unit goes to the aromatic system.
            atom.implicit_h = std::max(0, valences.front() - bond_sum[a] - 1);
            continue;
        }
        const auto chosen = std::find_if(valences.begin(), valences.end(),
                                         [&](int v) { return v >= bond_sum[a]; });
        if (chosen == valences.end()) {
            fail_at(SmilesErrorKind::ValenceError, atom_pos_[a],
                    "explicit valence " + std::to_string(bond_sum[a]) + " too high for " +
                        std::string(element_symbol(atom.element)));
        }
        atom.implicit_h = *chosen - bond_sum[a];
    }

    // Fold plain [H] atoms into their heavy neighbour.
    std::vector<int> degree(n, 0);
    for (const auto& rb : bonds_) {
        ++degree[static_cast<std::size_t>(rb.a)];
        ++degree[static_cast<std::size_t>(rb.b)];
    }
    std::vector<bool> drop(n, false);
    for (const auto& rb : bonds_) {
        for (auto [h, heavy] : {std::pair{rb.a, rb.b}, std::pair{rb.b, rb.a}}) {
            const Atom& ha = atoms_[static_cast<std::size_t>(h)];
            const Atom& other = atoms_[static_cast<std::size_t>(heavy)];
            if (ha.element == 1 && ha.bracket && !ha.isotope && ha.formal_charge == 0 &&
                ha.explicit_h == 0 && degree[static_cast<std::size_t>(h)] == 1 && other.element != 1 &&
                rb.order == BondOrder::Single) {
                drop[static_cast<std::size_t>(h)] = true;
            }
        }
    }
    std::vector<int> remap(n, -1);
    std::vector<Atom> atoms;
    atoms.reserve(n);
    for (std::size_t a = 0; a < n; ++a) {
        if (!drop[a]) {
            remap[a] = static_cast<int>(atoms.size());
            atoms.push_back(atoms_[a]);
        }
    }
    std::vector<Bond> bonds;
    std::vector<bool> implicit_aromatic;
    bonds.reserve(bonds_.size());
    for (const auto& rb : bonds_) {
        if (drop[static_cast<std::size_t>(rb.a)] || drop[static_cast<std::size_t>(rb.b)]) {
            const int heavy = drop[static_cast<std::size_t>(rb.a)] ? rb.b : rb.a;
            atoms[static_cast<std::size_t>(remap[static_cast<std::size_t>(heavy)])].explicit_h += 1;
            continue;
        }
        bonds.push_back(Bond{remap[static_cast<std::size_t>(rb.a)], remap[static_cast<std::size_t>(rb.b)],
                             rb.order, false});
        implicit_aromatic.push_back(rb.implicit_aromatic);
    }

    // Ring membership, then aromatic consistency.
    Molecule probe(atoms, bonds, std::string{});
    probe.perceive_rings();
    for (std::size_t b = 0; b < bonds.size(); ++b) {
        if (implicit_aromatic[b] && !probe.bond(static_cast<int>(b)).in_ring) {
            bonds[b].order = BondOrder::Single;
        }
    }
    for (int a = 0; a < probe.num_atoms(); ++a) {
        if (probe.atom(a).aromatic && !probe.atom(a).in_ring) {
            std::size_t pos = 0;
            for (std::size_t k = 0; k < n; ++k) {
                if (remap[k] == a) {
                    pos = atom_pos_[k];
                }
            }
            fail_at(SmilesErrorKind::InvalidAromatic, pos, "aromatic atom outside any ring");
        }
    }

    Molecule mol(std::move(atoms), std::move(bonds), std::move(source));
    mol.perceive_rings();
    if (options.normalize_aromaticity) {
        mol.normalize_aromaticity();
    }
    return mol;
}

}  // namespace

std::string_view to_string(SmilesErrorKind kind) noexcept {
    switch (kind) {
        case SmilesErrorKind::Empty: return "Empty";
        case SmilesErrorKind::UnclosedRing: return "UnclosedRing";
        case SmilesErrorKind::UnbalancedParenthesis: return "UnbalancedParenthesis";
        case SmilesErrorKind::UnknownSymbol: return "UnknownSymbol";
        case SmilesErrorKind::ValenceError: return "ValenceError";
        case SmilesErrorKind::InvalidAromatic: return "InvalidAromatic";
        case SmilesErrorKind::InvalidBond: return "InvalidBond";
    }
    return "Unknown";
}

SmilesError::SmilesError(SmilesErrorKind kind, std::size_t position, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + " at " + std::to_string(position) + ": " + what),
      kind_(kind), position_(position) {}

int element_from_symbol(std::string_view symbol) noexcept {
    for (std::size_t z = 1; z < kSymbols.size(); ++z) {
        if (kSymbols[z] == symbol) {
            return static_cast<int>(z);
        }
    }
    return 0;
}

std::string_view element_symbol(int atomic_number) noexcept {
    if (atomic_number < 1 || atomic_number >= static_cast<int>(kSymbols.size())) {
        return "?";
    }
    return kSymbols[static_cast<std::size_t>(atomic_number)];
}

Molecule parse_smiles(std::string_view text, const ParseOptions& options) {
    // Surrounding whitespace is ignored; interior whitespace ends the string.
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
        throw SmilesError(SmilesErrorKind::Empty, 0, "empty SMILES");
    }
    std::string_view body = text.substr(first);
    body = body.substr(0, body.find_first_of(" \t\r\n"));
    Parser parser(body, first);
    return parser.run(options, std::string(body));
}

}  // namespace bcfp
