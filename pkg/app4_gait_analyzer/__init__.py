# App 4 package
