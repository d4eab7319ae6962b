use super::{ColumnData, Frame};
use crate::value::LogicalDtype;

/// In-memory bytes attributed to one logical column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnFootprint {
    pub name: String,
    pub dtype: LogicalDtype,
    /// Block cells, or pool offsets plus payload.
    pub data_bytes: u64,
    /// Dictionary value bytes (dict columns only).
    pub dict_bytes: u64,
    /// Estimated lookup-index cost, reported apart from the total.
    pub index_overhead_bytes: u64,
}

impl ColumnFootprint {
    pub fn total(&self) -> u64 {
        self.data_bytes + self.dict_bytes
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FootprintReport {
    pub columns: Vec<ColumnFootprint>,
}

impl FootprintReport {
    pub fn total_bytes(&self) -> u64 {
        self.columns.iter().map(ColumnFootprint::total).sum()
    }

    pub fn index_overhead_bytes(&self) -> u64 {
        self.columns.iter().map(|c| c.index_overhead_bytes).sum()
    }
}

impl Frame {
    /// Bytes held by each logical column's physical storage. Views report the
    /// storage they reference, so a filtered view costs the same as its source.
    pub fn memory_footprint(&self) -> FootprintReport {
        let columns = (0..self.num_columns())
            .map(|j| {
                let view = self.view_at(j);
                let data_bytes = match view.data {
                    ColumnData::Cells(c) => 8 * c.len() as u64,
                    ColumnData::Pool(p) => p.footprint_bytes(),
                };
                ColumnFootprint {
                    name: self.names[j].clone(),
                    dtype: view.dtype,
                    data_bytes,
                    dict_bytes: view.dict.map_or(0, |d| d.value_bytes()),
                    index_overhead_bytes: view.dict.map_or(0, |d| d.index_overhead_bytes()),
                }
            })
            .collect();
        FootprintReport { columns }
    }
}

#[cfg(test)]
mod tests {
    use crate::frame::FrameBuilder;

    #[test]
    fn footprint_arithmetic() {
        let f = FrameBuilder::new()
            .int64("i", (0..1000).collect())
            .unwrap()
            .build()
            .unwrap();
        assert_eq!(f.memory_footprint().total_bytes(), 8000);

        let f = FrameBuilder::new()
            .raw("s", ["ab", "c"].into_iter().collect())
            .unwrap()
            .build()
            .unwrap();
        assert_eq!(f.memory_footprint().columns[0].data_bytes, 27);

        let f = FrameBuilder::new()
            .strings("d", ["R", "N", "N", "A", "R", "R", "N", "A"], 0.5)
            .unwrap()
            .build()
            .unwrap();
        let c = &f.memory_footprint().columns[0];
        assert_eq!((c.data_bytes, c.dict_bytes), (64, 3));
        assert!(c.index_overhead_bytes > 0);
    }
}
