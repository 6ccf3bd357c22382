#include "landrec/ledger.hpp"

#include "landrec/dna.hpp"
#include "landrec/error.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <chrono>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

namespace landrec::ledger {

namespace fs = std::filesystem;

const char* to_string(TxKind kind)
{
    switch (kind) {
    case TxKind::Genesis: return "GENESIS";
    case TxKind::Register: return "REGISTER";
    case TxKind::Transfer: return "TRANSFER";
    }
    return "UNKNOWN";
}

Bytes serialize_transaction(const TransactionRecord& tx)
{
    ByteWriter w;
    w.reserve(1 + 2 + tx.owner_id.size() + 4 + tx.payload.dna.size() + 32 + 32 + 8);
    w.u8(static_cast<std::uint8_t>(tx.kind));
    w.str16(tx.owner_id);
    w.str32(tx.payload.dna);
    w.raw(tx.payload.key_fingerprint);
    w.raw(tx.deed_hash);
    w.u64(tx.created_at);
    return std::move(w).take();
}

TransactionRecord parse_transaction(ByteSpan bytes)
{
    ByteReader r(bytes);
    TransactionRecord tx;
    const std::uint8_t kind = r.u8();
    if (kind > static_cast<std::uint8_t>(TxKind::Transfer))
        throw Error("malformed", "unknown transaction kind " + std::to_string(kind));
    tx.kind = static_cast<TxKind>(kind);
    tx.owner_id = r.str16();
    tx.payload.dna = r.str32();
    tx.payload.key_fingerprint = r.hash();
    tx.deed_hash = r.hash();
    tx.created_at = r.u64();
    if (!r.done()) throw Error("malformed", "trailing bytes after transaction");
    // The encoding is canonical, so these bytes are what compute_tx_id would hash.
    tx.tx_id = sha256(bytes);
    return tx;
}

Hash256 compute_tx_id(const TransactionRecord& tx) { return sha256(serialize_transaction(tx)); }

std::string check_transaction(const TransactionRecord& tx)
{
    const bool has_payload = !tx.payload.dna.empty();
    const bool has_deed = tx.deed_hash != kZeroHash;
    if (!dna::is_dna(tx.payload.dna)) return "payload is not a DNA string";
    switch (tx.kind) {
    case TxKind::Genesis:
        if (!tx.owner_id.empty() || has_payload || has_deed ||
            tx.payload.key_fingerprint != kZeroHash)
            return "genesis transaction must carry empty fields";
        break;
    case TxKind::Register:
        if (tx.owner_id.empty() || !has_payload) return "register needs owner and payload";
        if (has_deed) return "register must not reference a deed";
        break;
    case TxKind::Transfer:
        if (tx.owner_id.empty() || !has_payload || !has_deed)
            return "transfer needs owner, payload and deed hash";
        break;
    }
    if (has_payload && tx.payload.dna.size() % 4 != 0) return "payload is not whole bytes";
    return {};
}

TransactionRecord make_transaction(TxKind kind, std::string owner_id, pipeline::DnaCiphertext payload,
                                   const Hash256& deed_hash, std::uint64_t created_at)
{
    TransactionRecord tx{{}, kind, std::move(owner_id), std::move(payload), deed_hash, created_at};
    if (auto why = check_transaction(tx); !why.empty()) throw Error("invalid-transaction", why);
    tx.tx_id = compute_tx_id(tx);
    return tx;
}

Bytes serialize_header(const BlockHeader& h)
{
    ByteWriter w;
    w.reserve(kHeaderSize);
    w.u64(h.block_id);
    w.raw(h.prev_hash);
    w.u32(h.tx_count);
    w.u64(h.nonce);
    w.raw(h.merkle_root);
    w.u64(h.timestamp);
    return std::move(w).take();
}

Hash256 block_hash(const Block& block) { return sha256(serialize_header(block.header)); }

Hash256 merkle_root(std::span<const Hash256> leaves)
{
    if (leaves.empty()) throw Error("empty-block", "a block needs at least one transaction");
    std::vector<Hash256> level(leaves.begin(), leaves.end());
    while (level.size() > 1) {
        std::vector<Hash256> next;
        next.reserve((level.size() + 1) / 2);
        for (std::size_t i = 0; i < level.size(); i += 2) {
            const Hash256& left = level[i];
            const Hash256& right = i + 1 < level.size() ? level[i + 1] : level[i];
            std::array<Byte, 64> pair{};
            std::copy(left.begin(), left.end(), pair.begin());
            std::copy(right.begin(), right.end(), pair.begin() + 32);
            next.push_back(sha256(pair));
        }
        level = std::move(next);
    }
    return level.front();
}

Hash256 merkle_root(const std::vector<TransactionRecord>& txs)
{
    std::vector<Hash256> ids;
    ids.reserve(txs.size());
    for (const auto& tx : txs) ids.push_back(tx.tx_id);
    return merkle_root(ids);
}

Bytes serialize_block(const Block& block)
{
    ByteWriter w;
    w.raw(serialize_header(block.header));
    for (const auto& tx : block.transactions) {
        Bytes body = serialize_transaction(tx);
        w.u32(static_cast<std::uint32_t>(body.size()));
        w.raw(body);
    }
    w.raw(block_hash(block));
    return std::move(w).take();
}

namespace {

Block parse_block(ByteSpan record)
{
    ByteReader r(record);
    Block b;
    b.header.block_id = r.u64();
    b.header.prev_hash = r.hash();
    b.header.tx_count = r.u32();
    b.header.nonce = r.u64();
    b.header.merkle_root = r.hash();
    b.header.timestamp = r.u64();
    // Each transaction takes at least 4 + 79 bytes; reject absurd counts early.
    if (b.header.tx_count > r.remaining() / 83)
        throw Error("malformed", "tx_count exceeds record size");
    b.transactions.reserve(b.header.tx_count);
    for (std::uint32_t i = 0; i < b.header.tx_count; ++i) {
        const std::uint32_t len = r.u32();
        b.transactions.push_back(parse_transaction(r.raw(len)));
    }
    const Hash256 seal = r.hash();
    if (!r.done()) throw Error("malformed", "trailing bytes after block");
    if (seal != block_hash(b)) throw Error("block-hash-mismatch", "header does not match its seal");
    return b;
}

ChainViolation violation(std::uint64_t pos, std::string reason, std::string detail)
{
    return ChainViolation{pos, std::move(reason), std::move(detail)};
}

std::string describe(const ChainViolation& v)
{
    return "block " + std::to_string(v.position) + ": " + v.reason + " (" + v.detail + ")";
}

} // namespace

namespace {

// tx_ids_fresh: the ids were just hashed from the stored bytes by
// parse_chain, so recomputing them would only repeat that work.
std::optional<ChainViolation> check_blocks(std::span<const Block> blocks, bool tx_ids_fresh)
{
    if (blocks.empty()) return violation(0, "empty-chain", "chain has no genesis block");

    Hash256 prev = kZeroHash;
    std::uint64_t prev_time = 0;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        const Block& b = blocks[i];
        const BlockHeader& h = b.header;
        if (h.prev_hash != prev)
            return violation(i, "link-broken", "prev_hash does not match preceding block");
        if (h.block_id != i)
            return violation(i, "id-sequence", "expected id " + std::to_string(i) + ", found " +
                                                   std::to_string(h.block_id));
        if (h.nonce != 0) return violation(i, "nonce-nonzero", "nonce must be 0");
        if (h.tx_count != b.transactions.size() || b.transactions.empty())
            return violation(i, "tx-count-mismatch", "header tx_count disagrees with body");
        for (std::size_t t = 0; t < b.transactions.size(); ++t) {
            const auto& tx = b.transactions[t];
            if (!tx_ids_fresh && tx.tx_id != compute_tx_id(tx))
                return violation(i, "tx-id-mismatch", "transaction " + std::to_string(t));
            if (auto why = check_transaction(tx); !why.empty())
                return violation(i, "invalid-transaction", why);
            if ((tx.kind == TxKind::Genesis) != (i == 0))
                return violation(i, "genesis-invalid", "genesis transaction outside block 0");
        }
        if (i == 0 && b.transactions.size() != 1)
            return violation(i, "genesis-invalid", "genesis block holds one transaction");
        if (h.merkle_root != merkle_root(b.transactions))
            return violation(i, "merkle-mismatch", "merkle root does not match transactions");
        if (h.timestamp < prev_time)
            return violation(i, "timestamp-regression", "timestamp precedes previous block");
        prev = block_hash(b);
        prev_time = h.timestamp;
    }
    return std::nullopt;
}

} // namespace

std::optional<ChainViolation> verify_chain(std::span<const Block> blocks) { return check_blocks(blocks, false); }

ParsedChain parse_chain(ByteSpan file_bytes)
{
    ParsedChain out;
    ByteReader r(file_bytes);
    while (!r.done()) {
        const std::uint64_t pos = out.blocks.size();
        const std::uint64_t offset = r.position();
        try {
            const std::uint32_t len = r.u32();
            out.blocks.push_back(parse_block(r.raw(len)));
            out.offsets.push_back(offset);
        } catch (const Error& e) {
            const std::string reason = e.code() == "block-hash-mismatch" ? e.code() : "malformed";
            out.violation = violation(pos, reason, e.what());
            break;
        }
    }
    return out;
}

namespace {

// The one acceptance test for stored bytes, shared by verify_chain_bytes and
// the Ledger's startup load.
ParsedChain load_checked(ByteSpan file_bytes)
{
    ParsedChain parsed = parse_chain(file_bytes);
    if (!parsed.violation) parsed.violation = check_blocks(parsed.blocks, true);
    return parsed;
}

} // namespace

std::optional<ChainViolation> verify_chain_bytes(ByteSpan file_bytes) { return load_checked(file_bytes).violation; }

void MemoryBlockStore::append(std::uint64_t, ByteSpan record)
{
    ByteWriter w;
    w.u32(static_cast<std::uint32_t>(record.size()));
    w.raw(record);
    image_.insert(image_.end(), w.data().begin(), w.data().end());
}

FileBlockStore::FileBlockStore(fs::path dir)
    : chain_path_(dir / "chain.dat"), index_path_(dir / "chain.idx")
{
    fs::create_directories(dir);
}

Bytes FileBlockStore::load_all()
{
    std::ifstream in(chain_path_, std::ios::binary);
    if (!in) return {};
    return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void FileBlockStore::append(std::uint64_t block_id, ByteSpan record)
{
    ByteWriter w;
    w.u32(static_cast<std::uint32_t>(record.size()));
    w.raw(record);
    const Bytes& data = w.data();

    const int fd = ::open(chain_path_.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (fd < 0) throw Error("persistence-failure", std::string("open: ") + std::strerror(errno));
    const off_t start = ::lseek(fd, 0, SEEK_END);
    std::size_t written = 0;
    bool ok = start >= 0;
    while (ok && written < data.size()) {
        const ssize_t n = ::write(fd, data.data() + written, data.size() - written);
        if (n < 0 && errno == EINTR) continue;
        ok = n > 0;
        if (ok) written += static_cast<std::size_t>(n);
    }
    if (ok) ok = ::fsync(fd) == 0;
    if (!ok) {
        const std::string why = std::strerror(errno);
        if (start >= 0 && ::ftruncate(fd, start) != 0) {
            // Leave the torn tail; the next open reports it as a violation.
        }
        ::close(fd);
        throw Error("persistence-failure", "append failed: " + why);
    }
    ::close(fd);

    // The index is advisory; a lost line is repaired by the next full scan.
    std::ofstream idx(index_path_, std::ios::app);
    idx << block_id << ' ' << start << '\n';
}

void FileBlockStore::rebuild_index(std::span<const std::uint64_t> offsets)
{
    const fs::path tmp = index_path_.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        for (std::size_t i = 0; i < offsets.size(); ++i) out << i << ' ' << offsets[i] << '\n';
    }
    fs::rename(tmp, index_path_);
}

bool FileBlockStore::index_matches(std::span<const std::uint64_t> offsets) const
{
    std::ifstream in(index_path_);
    if (!in) return false;
    std::uint64_t id = 0, off = 0;
    std::size_t n = 0;
    while (in >> id >> off) {
        if (n >= offsets.size() || id != n || off != offsets[n]) return false;
        ++n;
    }
    return n == offsets.size();
}

Block read_block_from_dir(const fs::path& dir, std::uint64_t block_id)
{
    std::ifstream idx(dir / "chain.idx");
    if (!idx) throw Error("not-found", "no chain index in " + dir.string());
    std::uint64_t id = 0, off = 0;
    bool found = false;
    while (idx >> id >> off) {
        if (id == block_id) {
            found = true;
            break;
        }
    }
    if (!found) throw Error("not-found", "block " + std::to_string(block_id) + " not found");

    std::ifstream in(dir / "chain.dat", std::ios::binary);
    in.seekg(static_cast<std::streamoff>(off));
    Byte len_buf[4];
    if (!in.read(reinterpret_cast<char*>(len_buf), 4))
        throw Error("chain-corrupt", "index points past end of chain file");
    const std::uint32_t len = ByteReader(len_buf).u32();
    Bytes record(len);
    if (!in.read(reinterpret_cast<char*>(record.data()), len))
        throw Error("chain-corrupt", "truncated block record");
    try {
        Block b = parse_block(record);
        if (b.header.block_id != block_id) throw Error("chain-corrupt", "index points at wrong block");
        return b;
    } catch (const Error& e) {
        if (e.code() == "chain-corrupt") throw;
        throw Error("chain-corrupt", e.what());
    }
}

std::uint64_t unix_now()
{
    return static_cast<std::uint64_t>(std::chrono::duration_cast<std::chrono::seconds>(
                                          std::chrono::system_clock::now().time_since_epoch())
                                          .count());
}

Ledger::Ledger(std::unique_ptr<BlockStore> store, Clock clock)
    : store_(std::move(store)), clock_(std::move(clock))
{
    const Bytes image = store_->load_all();
    if (image.empty()) {
        Block genesis;
        genesis.transactions.push_back(
            make_transaction(TxKind::Genesis, {}, {}, kZeroHash, clock_()));
        genesis.header.tx_count = 1;
        genesis.header.merkle_root = merkle_root(genesis.transactions);
        genesis.header.timestamp = genesis.transactions.front().created_at;
        store_->append(0, serialize_block(genesis));
        blocks_.push_back(std::move(genesis));
        return;
    }

    ParsedChain parsed = load_checked(image);
    if (parsed.violation) throw Error("chain-corrupt", describe(*parsed.violation));
    if (auto* file = dynamic_cast<FileBlockStore*>(store_.get());
        file && !file->index_matches(parsed.offsets))
        file->rebuild_index(parsed.offsets);
    blocks_ = std::move(parsed.blocks);
}

std::uint64_t Ledger::append_block(std::vector<TransactionRecord> transactions)
{
    if (transactions.empty()) throw Error("empty-block", "a block needs at least one transaction");
    for (const auto& tx : transactions) {
        if (auto why = check_transaction(tx); !why.empty()) throw Error("invalid-transaction", why);
        if (tx.kind == TxKind::Genesis)
            throw Error("invalid-transaction", "genesis transactions cannot be appended");
        if (tx.tx_id != compute_tx_id(tx))
            throw Error("invalid-transaction", "tx_id does not match transaction body");
    }

    std::lock_guard writer(writer_mu_);
    Block block;
    {
        std::shared_lock lock(mu_);
        const Block& tip = blocks_.back();
        block.header.block_id = tip.header.block_id + 1;
        block.header.prev_hash = block_hash(tip);
        // Clock regression reuses the previous timestamp.
        block.header.timestamp = std::max(clock_(), tip.header.timestamp);
    }
    block.header.tx_count = static_cast<std::uint32_t>(transactions.size());
    block.transactions = std::move(transactions);
    block.header.merkle_root = merkle_root(block.transactions);

    store_->append(block.header.block_id, serialize_block(block));

    const std::uint64_t id = block.header.block_id;
    std::unique_lock lock(mu_);
    blocks_.push_back(std::move(block));
    return id;
}

Block Ledger::get_block(std::uint64_t block_id) const
{
    std::shared_lock lock(mu_);
    if (block_id >= blocks_.size())
        throw Error("not-found", "block " + std::to_string(block_id) + " not found");
    return blocks_[block_id];
}

Block Ledger::tip() const
{
    std::shared_lock lock(mu_);
    return blocks_.back();
}

std::uint64_t Ledger::height() const
{
    std::shared_lock lock(mu_);
    return blocks_.size();
}

std::vector<Block> Ledger::snapshot() const
{
    std::shared_lock lock(mu_);
    return blocks_;
}

std::optional<ChainViolation> Ledger::verify() const
{
    std::shared_lock lock(mu_);
    return verify_chain(blocks_);
}

} // namespace landrec::ledger
