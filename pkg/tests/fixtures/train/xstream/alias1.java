XStream mapper = new XStream();
mapper.alias("entry", Entry.class);
String text = mapper.toXML(entry);
