//! Seeded generator for a small TPC-H-shaped database.
//!
//! Value domains follow dbgen closely enough for the query catalog: order
//! dates span 1992-01-01 to 1998-08-02, line items ship 1 to 121 days after
//! their order, discounts are whole percents up to 10, and every foreign key
//! resolves. Customers whose key is a multiple of three place no orders.

use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::encoding::DEFAULT_THRESHOLD;
use crate::error::{Error, Result};
use crate::frame::{Frame, FrameBuilder};
use crate::io::mfb::write_mfb;
use crate::value::parse_date;

pub const TABLES: [&str; 8] = [
    "region", "nation", "supplier", "customer", "part", "partsupp", "orders", "lineitem",
];

const REGIONS: [&str; 5] = ["AFRICA", "AMERICA", "ASIA", "EUROPE", "MIDDLE EAST"];

const NATIONS: [(&str, i64); 25] = [
    ("ALGERIA", 0),
    ("ARGENTINA", 1),
    ("BRAZIL", 1),
    ("CANADA", 1),
    ("EGYPT", 4),
    ("ETHIOPIA", 0),
    ("FRANCE", 3),
    ("GERMANY", 3),
    ("INDIA", 2),
    ("INDONESIA", 2),
    ("IRAN", 4),
    ("IRAQ", 4),
    ("JAPAN", 2),
    ("JORDAN", 4),
    ("KENYA", 0),
    ("MOROCCO", 0),
    ("MOZAMBIQUE", 0),
    ("PERU", 1),
    ("CHINA", 2),
    ("ROMANIA", 3),
    ("SAUDI ARABIA", 4),
    ("VIETNAM", 2),
    ("RUSSIA", 3),
    ("UNITED KINGDOM", 3),
    ("UNITED STATES", 1),
];

const COLORS: [&str; 92] = [
    "almond",
    "antique",
    "aquamarine",
    "azure",
    "beige",
    "bisque",
    "black",
    "blanched",
    "blue",
    "blush",
    "brown",
    "burlywood",
    "burnished",
    "chartreuse",
    "chiffon",
    "chocolate",
    "coral",
    "cornflower",
    "cornsilk",
    "cream",
    "cyan",
    "dark",
    "deep",
    "dim",
    "dodger",
    "drab",
    "firebrick",
    "floral",
    "forest",
    "frosted",
    "gainsboro",
    "ghost",
    "goldenrod",
    "green",
    "grey",
    "honeydew",
    "hot",
    "indian",
    "ivory",
    "khaki",
    "lace",
    "lavender",
    "lawn",
    "lemon",
    "light",
    "lime",
    "linen",
    "magenta",
    "maroon",
    "medium",
    "metallic",
    "midnight",
    "mint",
    "misty",
    "moccasin",
    "navajo",
    "navy",
    "olive",
    "orange",
    "orchid",
    "pale",
    "papaya",
    "peach",
    "peru",
    "pink",
    "plum",
    "powder",
    "puff",
    "purple",
    "red",
    "rose",
    "rosy",
    "royal",
    "saddle",
    "salmon",
    "sandy",
    "seashell",
    "sienna",
    "sky",
    "slate",
    "smoke",
    "snow",
    "spring",
    "steel",
    "tan",
    "thistle",
    "tomato",
    "turquoise",
    "violet",
    "wheat",
    "white",
    "yellow",
];

const WORDS: [&str; 47] = [
    "furiously",
    "quickly",
    "carefully",
    "blithely",
    "slyly",
    "ironic",
    "final",
    "regular",
    "express",
    "pending",
    "bold",
    "even",
    "silent",
    "unusual",
    "fluffy",
    "close",
    "ruthless",
    "packages",
    "deposits",
    "accounts",
    "theodolites",
    "pinto",
    "beans",
    "instructions",
    "foxes",
    "ideas",
    "dependencies",
    "platelets",
    "asymptotes",
    "courts",
    "dolphins",
    "sleep",
    "wake",
    "are",
    "haggle",
    "nag",
    "use",
    "boost",
    "affix",
    "detect",
    "integrate",
    "cajole",
    "among",
    "across",
    "after",
    "special",
    "requests",
];

const SEGMENTS: [&str; 5] = [
    "AUTOMOBILE",
    "BUILDING",
    "FURNITURE",
    "HOUSEHOLD",
    "MACHINERY",
];
const PRIORITIES: [&str; 5] = ["1-URGENT", "2-HIGH", "3-MEDIUM", "4-NOT SPECIFIED", "5-LOW"];
const INSTRUCTIONS: [&str; 4] = [
    "DELIVER IN PERSON",
    "COLLECT COD",
    "NONE",
    "TAKE BACK RETURN",
];
const MODES: [&str; 7] = ["REG AIR", "AIR", "RAIL", "SHIP", "TRUCK", "MAIL", "FOB"];
const TYPE_SIZE: [&str; 6] = ["STANDARD", "SMALL", "MEDIUM", "LARGE", "ECONOMY", "PROMO"];
const TYPE_FINISH: [&str; 5] = ["ANODIZED", "BURNISHED", "PLATED", "POLISHED", "BRUSHED"];
const TYPE_METAL: [&str; 5] = ["TIN", "NICKEL", "BRASS", "STEEL", "COPPER"];
const CONTAINER_SIZE: [&str; 5] = ["SM", "LG", "MED", "JUMBO", "WRAP"];
const CONTAINER_KIND: [&str; 8] = ["CASE", "BOX", "BAG", "JAR", "PKG", "PACK", "CAN", "DRUM"];

/// Row counts for one scale factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cardinalities {
    pub supplier: usize,
    pub customer: usize,
    pub part: usize,
    pub orders: usize,
    pub clerks: usize,
}

impl Cardinalities {
    pub fn at_scale(scale: f64) -> Self {
        let n = |base: f64, min: usize| ((base * scale).round() as usize).max(min);
        Self {
            supplier: n(10_000.0, 4),
            customer: n(150_000.0, 3),
            part: n(200_000.0, 1),
            orders: n(1_500_000.0, 1),
            clerks: n(1_000.0, 1),
        }
    }
}

fn rng(seed: u64, table: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(table);
    r
}

fn pick<'a>(r: &mut ChaCha8Rng, from: &[&'a str]) -> &'a str {
    from[r.gen_range(0..from.len())]
}

fn comment(r: &mut ChaCha8Rng, min: usize, max: usize) -> String {
    let n = r.gen_range(min..=max);
    (0..n)
        .map(|_| pick(r, &WORDS))
        .collect::<Vec<_>>()
        .join(" ")
}

fn address(r: &mut ChaCha8Rng) -> String {
    const CHARS: &[u8] = b"abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789 ,";
    let n = r.gen_range(10..=40);
    (0..n)
        .map(|_| CHARS[r.gen_range(0..CHARS.len())] as char)
        .collect()
}

fn phone(r: &mut ChaCha8Rng, nation: i64) -> String {
    format!(
        "{}-{}-{}-{}",
        nation + 10,
        r.gen_range(100..1000),
        r.gen_range(100..1000),
        r.gen_range(1000..10000)
    )
}

fn cents(r: &mut ChaCha8Rng, lo: i64, hi: i64) -> f64 {
    r.gen_range(lo..=hi) as f64 / 100.0
}

/// dbgen's part price, in cents.
pub fn retail_price_cents(partkey: i64) -> i64 {
    90_000 + (partkey / 10) % 20_001 + 100 * (partkey % 1_000)
}

/// The `i`-th of a part's four suppliers; distinct for `i` in 0..4.
pub fn part_supplier(partkey: i64, i: i64, suppliers: usize) -> i64 {
    let s = suppliers as i64;
    ((partkey - 1) + i * (s / 4).max(1)) % s + 1
}

fn strs(v: &[String]) -> impl Iterator<Item = &str> + Clone {
    v.iter().map(String::as_str)
}

fn region(seed: u64) -> Result<Frame> {
    let mut r = rng(seed, 0);
    let comments: Vec<String> = (0..5).map(|_| comment(&mut r, 3, 8)).collect();
    FrameBuilder::new()
        .int64("r_regionkey", (0..5).collect())?
        .strings("r_name", REGIONS, DEFAULT_THRESHOLD)?
        .strings("r_comment", strs(&comments), DEFAULT_THRESHOLD)?
        .build()
}

fn nation(seed: u64) -> Result<Frame> {
    let mut r = rng(seed, 1);
    let comments: Vec<String> = (0..25).map(|_| comment(&mut r, 3, 8)).collect();
    FrameBuilder::new()
        .int64("n_nationkey", (0..25).collect())?
        .strings("n_name", NATIONS.iter().map(|n| n.0), DEFAULT_THRESHOLD)?
        .int64("n_regionkey", NATIONS.iter().map(|n| n.1).collect())?
        .strings("n_comment", strs(&comments), DEFAULT_THRESHOLD)?
        .build()
}

fn supplier(seed: u64, card: &Cardinalities) -> Result<Frame> {
    let mut r = rng(seed, 2);
    let n = card.supplier;
    let (mut names, mut addrs, mut nations, mut phones, mut bals, mut comments) = (
        Vec::new(),
        Vec::new(),
        Vec::new(),
        Vec::new(),
        Vec::new(),
        Vec::new(),
    );
    for k in 1..=n {
        let nk = r.gen_range(0..25i64);
        names.push(format!("Supplier#{k:09}"));
        addrs.push(address(&mut r));
        phones.push(phone(&mut r, nk));
        nations.push(nk);
        bals.push(cents(&mut r, -99_999, 999_999));
        comments.push(comment(&mut r, 4, 12));
    }
    FrameBuilder::new()
        .int64("s_suppkey", (1..=n as i64).collect())?
        .strings("s_name", strs(&names), DEFAULT_THRESHOLD)?
        .strings("s_address", strs(&addrs), DEFAULT_THRESHOLD)?
        .int64("s_nationkey", nations)?
        .strings("s_phone", strs(&phones), DEFAULT_THRESHOLD)?
        .float64("s_acctbal", bals)?
        .strings("s_comment", strs(&comments), DEFAULT_THRESHOLD)?
        .build()
}

fn customer(seed: u64, card: &Cardinalities) -> Result<Frame> {
    let mut r = rng(seed, 3);
    let n = card.customer;
    let (mut names, mut addrs, mut nations, mut phones, mut bals, mut segs, mut comments) = (
        Vec::new(),
        Vec::new(),
        Vec::new(),
        Vec::new(),
        Vec::new(),
        Vec::new(),
        Vec::new(),
    );
    for k in 1..=n {
        let nk = r.gen_range(0..25i64);
        names.push(format!("Customer#{k:09}"));
        addrs.push(address(&mut r));
        phones.push(phone(&mut r, nk));
        nations.push(nk);
        bals.push(cents(&mut r, -99_999, 999_999));
        segs.push(pick(&mut r, &SEGMENTS));
        comments.push(comment(&mut r, 4, 12));
    }
    FrameBuilder::new()
        .int64("c_custkey", (1..=n as i64).collect())?
        .strings("c_name", strs(&names), DEFAULT_THRESHOLD)?
        .strings("c_address", strs(&addrs), DEFAULT_THRESHOLD)?
        .int64("c_nationkey", nations)?
        .strings("c_phone", strs(&phones), DEFAULT_THRESHOLD)?
        .float64("c_acctbal", bals)?
        .strings("c_mktsegment", segs, DEFAULT_THRESHOLD)?
        .strings("c_comment", strs(&comments), DEFAULT_THRESHOLD)?
        .build()
}

fn part(seed: u64, card: &Cardinalities) -> Result<Frame> {
    let mut r = rng(seed, 4);
    let n = card.part;
    let (mut names, mut mfgrs, mut brands, mut types, mut sizes, mut containers, mut comments) = (
        Vec::new(),
        Vec::new(),
        Vec::new(),
        Vec::new(),
        Vec::new(),
        Vec::new(),
        Vec::new(),
    );
    for _ in 0..n {
        let colors: Vec<&str> = COLORS.choose_multiple(&mut r, 5).copied().collect();
        names.push(colors.join(" "));
        let m = r.gen_range(1..=5);
        mfgrs.push(format!("Manufacturer#{m}"));
        brands.push(format!("Brand#{m}{}", r.gen_range(1..=5)));
        types.push(format!(
            "{} {} {}",
            pick(&mut r, &TYPE_SIZE),
            pick(&mut r, &TYPE_FINISH),
            pick(&mut r, &TYPE_METAL)
        ));
        sizes.push(r.gen_range(1..=50i64));
        containers.push(format!(
            "{} {}",
            pick(&mut r, &CONTAINER_SIZE),
            pick(&mut r, &CONTAINER_KIND)
        ));
        comments.push(comment(&mut r, 2, 5));
    }
    let keys: Vec<i64> = (1..=n as i64).collect();
    let prices = keys
        .iter()
        .map(|&k| retail_price_cents(k) as f64 / 100.0)
        .collect();
    FrameBuilder::new()
        .int64("p_partkey", keys)?
        .strings("p_name", strs(&names), DEFAULT_THRESHOLD)?
        .strings("p_mfgr", strs(&mfgrs), DEFAULT_THRESHOLD)?
        .strings("p_brand", strs(&brands), DEFAULT_THRESHOLD)?
        .strings("p_type", strs(&types), DEFAULT_THRESHOLD)?
        .int64("p_size", sizes)?
        .strings("p_container", strs(&containers), DEFAULT_THRESHOLD)?
        .float64("p_retailprice", prices)?
        .strings("p_comment", strs(&comments), DEFAULT_THRESHOLD)?
        .build()
}

fn partsupp(seed: u64, card: &Cardinalities) -> Result<Frame> {
    let mut r = rng(seed, 5);
    let (mut parts, mut supps, mut avail, mut cost, mut comments) =
        (Vec::new(), Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for pk in 1..=card.part as i64 {
        for i in 0..4 {
            parts.push(pk);
            supps.push(part_supplier(pk, i, card.supplier));
            avail.push(r.gen_range(1..=9_999i64));
            cost.push(cents(&mut r, 100, 100_000));
            comments.push(comment(&mut r, 6, 14));
        }
    }
    FrameBuilder::new()
        .int64("ps_partkey", parts)?
        .int64("ps_suppkey", supps)?
        .int64("ps_availqty", avail)?
        .float64("ps_supplycost", cost)?
        .strings("ps_comment", strs(&comments), DEFAULT_THRESHOLD)?
        .build()
}

#[derive(Default)]
struct Lines {
    orderkey: Vec<i64>,
    partkey: Vec<i64>,
    suppkey: Vec<i64>,
    linenumber: Vec<i64>,
    quantity: Vec<f64>,
    extendedprice: Vec<f64>,
    discount: Vec<f64>,
    tax: Vec<f64>,
    returnflag: Vec<&'static str>,
    linestatus: Vec<&'static str>,
    shipdate: Vec<i64>,
    commitdate: Vec<i64>,
    receiptdate: Vec<i64>,
    shipinstruct: Vec<&'static str>,
    shipmode: Vec<&'static str>,
    comment: Vec<String>,
}

fn orders_and_lineitem(seed: u64, card: &Cardinalities) -> Result<(Frame, Frame)> {
    let mut r = rng(seed, 6);
    let start = parse_date("1992-01-01")?;
    let end = parse_date("1998-08-02")?;
    let current = parse_date("1995-06-17")?;
    let n = card.orders;
    let (mut custs, mut statuses, mut totals, mut dates, mut prios, mut clerks, mut comments) = (
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
    );
    let mut l = Lines::default();
    for ok in 1..=n as i64 {
        let cust = loop {
            let c = r.gen_range(1..=card.customer as i64);
            if c % 3 != 0 {
                break c;
            }
        };
        let odate = r.gen_range(start..=end);
        let mut total = 0.0;
        let (mut n_open, mut n_lines) = (0, 0);
        for line in 1..=r.gen_range(1..=7i64) {
            let pk = r.gen_range(1..=card.part as i64);
            let qty = r.gen_range(1..=50i64);
            let price = (qty * retail_price_cents(pk)) as f64 / 100.0;
            let disc = r.gen_range(0..=10i64) as f64 / 100.0;
            let tax = r.gen_range(0..=8i64) as f64 / 100.0;
            let ship = odate + r.gen_range(1..=121);
            let receipt = ship + r.gen_range(1..=30);
            l.orderkey.push(ok);
            l.partkey.push(pk);
            l.suppkey
                .push(part_supplier(pk, r.gen_range(0..4), card.supplier));
            l.linenumber.push(line);
            l.quantity.push(qty as f64);
            l.extendedprice.push(price);
            l.discount.push(disc);
            l.tax.push(tax);
            l.returnflag.push(if receipt <= current {
                if r.gen_bool(0.5) {
                    "R"
                } else {
                    "A"
                }
            } else {
                "N"
            });
            let open = ship > current;
            l.linestatus.push(if open { "O" } else { "F" });
            l.shipdate.push(ship);
            l.commitdate.push(odate + r.gen_range(30..=90));
            l.receiptdate.push(receipt);
            l.shipinstruct.push(pick(&mut r, &INSTRUCTIONS));
            l.shipmode.push(pick(&mut r, &MODES));
            l.comment.push(comment(&mut r, 2, 6));
            total += price * (1.0 + tax) * (1.0 - disc);
            n_open += open as usize;
            n_lines += 1;
        }
        custs.push(cust);
        statuses.push(match n_open {
            0 => "F",
            k if k == n_lines => "O",
            _ => "P",
        });
        totals.push((total * 100.0).round() / 100.0);
        dates.push(odate);
        prios.push(pick(&mut r, &PRIORITIES));
        clerks.push(format!("Clerk#{:09}", r.gen_range(1..=card.clerks)));
        comments.push(comment(&mut r, 4, 10));
    }
    let orders = FrameBuilder::new()
        .int64("o_orderkey", (1..=n as i64).collect())?
        .int64("o_custkey", custs)?
        .strings("o_orderstatus", statuses, DEFAULT_THRESHOLD)?
        .float64("o_totalprice", totals)?
        .date("o_orderdate", dates)?
        .strings("o_orderpriority", prios, DEFAULT_THRESHOLD)?
        .strings("o_clerk", strs(&clerks), DEFAULT_THRESHOLD)?
        .int64("o_shippriority", vec![0; n])?
        .strings("o_comment", strs(&comments), DEFAULT_THRESHOLD)?
        .build()?;
    let lineitem = FrameBuilder::new()
        .int64("l_orderkey", l.orderkey)?
        .int64("l_partkey", l.partkey)?
        .int64("l_suppkey", l.suppkey)?
        .int64("l_linenumber", l.linenumber)?
        .float64("l_quantity", l.quantity)?
        .float64("l_extendedprice", l.extendedprice)?
        .float64("l_discount", l.discount)?
        .float64("l_tax", l.tax)?
        .strings("l_returnflag", l.returnflag, DEFAULT_THRESHOLD)?
        .strings("l_linestatus", l.linestatus, DEFAULT_THRESHOLD)?
        .date("l_shipdate", l.shipdate)?
        .date("l_commitdate", l.commitdate)?
        .date("l_receiptdate", l.receiptdate)?
        .strings("l_shipinstruct", l.shipinstruct, DEFAULT_THRESHOLD)?
        .strings("l_shipmode", l.shipmode, DEFAULT_THRESHOLD)?
        .strings("l_comment", strs(&l.comment), DEFAULT_THRESHOLD)?
        .build()?;
    Ok((orders, lineitem))
}

/// All eight tables in [`TABLES`] order.
pub fn gen_tables(scale: f64, seed: u64) -> Result<Vec<(&'static str, Frame)>> {
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::Schema(format!(
            "scale must be positive, got {scale}"
        )));
    }
    let card = Cardinalities::at_scale(scale);
    let (orders, lineitem) = orders_and_lineitem(seed, &card)?;
    Ok(vec![
        ("region", region(seed)?),
        ("nation", nation(seed)?),
        ("supplier", supplier(seed, &card)?),
        ("customer", customer(seed, &card)?),
        ("part", part(seed, &card)?),
        ("partsupp", partsupp(seed, &card)?),
        ("orders", orders),
        ("lineitem", lineitem),
    ])
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableFile {
    pub table: String,
    pub path: PathBuf,
    pub n_rows: usize,
    pub bytes: u64,
    /// Hex SHA-256 of the file contents.
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenManifest {
    pub scale: f64,
    pub seed: u64,
    pub tables: Vec<TableFile>,
}

pub fn table_path(dir: impl AsRef<Path>, table: &str) -> PathBuf {
    dir.as_ref().join(format!("{table}.mfb"))
}

/// Writes `<table>.mfb` for every table into `out_dir`.
pub fn gen_tpch_mini(scale: f64, seed: u64, out_dir: impl AsRef<Path>) -> Result<GenManifest> {
    let out_dir = out_dir.as_ref();
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let tables = gen_tables(scale, seed)?
        .into_iter()
        .map(|(name, frame)| {
            let path = table_path(out_dir, name);
            write_mfb(&frame, &path)?;
            let bytes = std::fs::read(&path).map_err(|e| Error::io(&path, e))?;
            Ok(TableFile {
                table: name.to_owned(),
                n_rows: frame.num_rows(),
                bytes: bytes.len() as u64,
                sha256: format!("{:x}", Sha256::digest(&bytes)),
                path,
            })
        })
        .collect::<Result<_>>()?;
    Ok(GenManifest {
        scale,
        seed,
        tables,
    })
}
