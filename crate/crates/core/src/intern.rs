use indexmap::IndexSet;

/// Dense `u32` handles for string tokens (entity ids, class ids).
#[derive(Clone, Debug, Default)]
pub struct Interner {
    names: IndexSet<Box<str>>,
}

impl Interner {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern(&mut self, name: &str) -> u32 {
        if let Some(idx) = self.names.get_index_of(name) {
            return idx as u32;
        }
        let (idx, _) = self.names.insert_full(name.into());
        u32::try_from(idx).expect("interner exceeded u32 key space")
    }

    pub fn get(&self, name: &str) -> Option<u32> {
        self.names.get_index_of(name).map(|i| i as u32)
    }

    pub fn resolve(&self, key: u32) -> &str {
        &self.names[key as usize]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, &str)> {
        self.names.iter().enumerate().map(|(i, s)| (i as u32, &**s))
    }
}
